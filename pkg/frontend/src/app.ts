// DOM shell around TunerController. No logic beyond wiring; everything
// testable lives in the other modules.

import { N_DEGREES, SLIDER_MAX, SLIDER_MIN, SLIDER_STEP } from "./blend.js";
import { TunerClient } from "./client.js";
import type { ResultView, TunerView } from "./tuner.js";
import { TunerController } from "./tuner.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function pngUrl(b64: string): string {
  return `data:image/png;base64,${b64}`;
}

async function fileToB64(file: File): Promise<string> {
  const url = await new Promise<string>((resolve, reject) => {
    const reader = new FileReader();
    reader.onload = () => resolve(reader.result as string);
    reader.onerror = () => reject(reader.error);
    reader.readAsDataURL(file);
  });
  return url.slice(url.indexOf(",") + 1);
}

function fmtMetric(v: number | string | null): string {
  if (v === null) return "-";
  if (typeof v === "string") return v;
  return v.toFixed(3);
}

const banner = () => el<HTMLDivElement>("banner");
let bannerTimer: ReturnType<typeof setTimeout> | null = null;

function showBanner(message: string): void {
  const node = banner();
  node.textContent = message;
  node.classList.add("visible");
  if (bannerTimer !== null) clearTimeout(bannerTimer);
  bannerTimer = setTimeout(() => node.classList.remove("visible"), 6000);
}

function renderPins(controller: TunerController): void {
  const row = el<HTMLDivElement>("pins");
  row.replaceChildren();
  controller.pins.list().forEach((pin, i) => {
    const card = document.createElement("div");
    card.className = "pin-card";
    const img = document.createElement("img");
    img.src = pngUrl(pin.image);
    const cap = document.createElement("div");
    cap.className = "pin-cap";
    const at = Number.isNaN(pin.slider) ? "blend" : `v=${pin.slider}`;
    cap.textContent = pin.psnr === null ? at : `${at} psnr ${fmtMetric(pin.psnr)}`;
    const drop = document.createElement("button");
    drop.textContent = "unpin";
    drop.addEventListener("click", () => {
      controller.pins.unpin(i);
      renderPins(controller);
    });
    card.append(img, cap, drop);
    row.append(card);
  });
  el<HTMLButtonElement>("pin").disabled = controller.pins.full;
}

function main(): void {
  const serviceUrl = el<HTMLInputElement>("service-url");
  const client = () => new TunerClient(serviceUrl.value.replace(/\/$/, ""));

  const after = el<HTMLImageElement>("after");
  const before = el<HTMLImageElement>("before");
  const metrics = el<HTMLDivElement>("metrics");
  const busy = el<HTMLSpanElement>("busy");
  const slider = el<HTMLInputElement>("slider");
  const sliderOut = el<HTMLOutputElement>("slider-out");

  slider.min = String(SLIDER_MIN);
  slider.max = String(SLIDER_MAX);
  slider.step = String(SLIDER_STEP);

  const view: TunerView = {
    showResult(result: ResultView): void {
      after.src = pngUrl(result.image);
      after.classList.add("loaded");
      const parts = [
        result.psnr !== null ? `psnr ${fmtMetric(result.psnr)} dB` : "",
        result.ssim !== null ? `ssim ${fmtMetric(result.ssim)}` : "",
        `${result.latencyMs.toFixed(0)} ms`,
        `ckpt ${result.checkpointId}`,
      ];
      metrics.textContent = parts.filter(Boolean).join("  |  ");
    },
    showError(message: string): void {
      showBanner(message);
    },
    showBusy(b: boolean): void {
      busy.style.visibility = b ? "visible" : "hidden";
    },
  };

  let controller = new TunerController(client(), view);
  serviceUrl.addEventListener("change", () => {
    controller = new TunerController(client(), view);
    renderPins(controller);
  });

  el<HTMLInputElement>("image-file").addEventListener("change", async (ev) => {
    const file = (ev.target as HTMLInputElement).files?.[0];
    if (!file) return;
    const b64 = await fileToB64(file);
    before.src = pngUrl(b64);
    controller.setImage(b64);
  });

  el<HTMLInputElement>("gt-file").addEventListener("change", async (ev) => {
    const file = (ev.target as HTMLInputElement).files?.[0];
    controller.setGt(file ? await fileToB64(file) : null);
  });

  slider.addEventListener("input", () => {
    const snapped = controller.setSlider(Number(slider.value));
    sliderOut.textContent = snapped.value.toFixed(2);
    slider.classList.toggle("clamped", snapped.clamped);
  });
  sliderOut.textContent = Number(slider.value).toFixed(2);

  el<HTMLButtonElement>("pin").addEventListener("click", () => {
    if (controller.pinCurrent()) {
      renderPins(controller);
    } else if (controller.result === null) {
      showBanner("nothing to pin yet");
    }
  });

  // advanced panel: nine weight boxes, normalized on apply
  const weightsRow = el<HTMLDivElement>("weights");
  const weightInputs: HTMLInputElement[] = [];
  for (let i = 0; i < N_DEGREES; i += 1) {
    const input = document.createElement("input");
    input.type = "number";
    input.min = "0";
    input.step = "0.05";
    input.value = i === 4 ? "1" : "0";
    weightInputs.push(input);
    const wrap = document.createElement("label");
    wrap.append(`d${i + 1}`, input);
    weightsRow.append(wrap);
  }
  el<HTMLButtonElement>("apply-weights").addEventListener("click", () => {
    const applied = controller.setAdvancedBlend(weightInputs.map((w) => Number(w.value)));
    if (applied !== null) {
      applied.forEach((w, i) => {
        weightInputs[i].value = w.toFixed(4);
      });
    }
  });
  el<HTMLButtonElement>("from-slider").addEventListener("click", () => {
    controller.currentBlend().forEach((w, i) => {
      weightInputs[i].value = String(w);
    });
  });

  // draggable split divider over the stacked before/after images
  const stage = el<HTMLDivElement>("stage");
  const divider = el<HTMLDivElement>("divider");
  const setSplit = (frac: number) => {
    const clamped = Math.min(Math.max(frac, 0), 1);
    after.style.clipPath = `inset(0 0 0 ${clamped * 100}%)`;
    divider.style.left = `${clamped * 100}%`;
  };
  setSplit(0.5);
  let dragging = false;
  divider.addEventListener("pointerdown", () => {
    dragging = true;
  });
  window.addEventListener("pointerup", () => {
    dragging = false;
  });
  window.addEventListener("pointermove", (ev) => {
    if (!dragging) return;
    const rect = stage.getBoundingClientRect();
    setSplit((ev.clientX - rect.left) / rect.width);
  });

  el<HTMLButtonElement>("connect").addEventListener("click", async () => {
    try {
      const health = await client().health();
      el<HTMLSpanElement>("ckpt").textContent = `checkpoint ${health.checkpoint_id}`;
    } catch (err) {
      showBanner(err instanceof Error ? err.message : String(err));
    }
  });
}

main();
