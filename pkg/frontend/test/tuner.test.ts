import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { sliderToBlend } from "../src/blend.js";
import { ServiceError } from "../src/client.js";
import type { RectifyRequestBody, RectifyResponseBody } from "../src/client.js";
import { TunerController } from "../src/tuner.js";
import type { ResultView, TunerView } from "../src/tuner.js";

beforeEach(() => {
  vi.useFakeTimers();
});

afterEach(() => {
  vi.useRealTimers();
});

function stubView() {
  const results: ResultView[] = [];
  const errors: string[] = [];
  const view: TunerView = {
    showResult: (r) => results.push(r),
    showError: (e) => errors.push(e),
    showBusy: () => {},
  };
  return { view, results, errors };
}

/** Client that answers immediately, tagging images with the call index. */
function autoClient(meta: Partial<RectifyResponseBody> = {}) {
  const calls: RectifyRequestBody[] = [];
  const client = {
    async rectify(body: RectifyRequestBody): Promise<RectifyResponseBody> {
      calls.push(body);
      return {
        image: `img-${calls.length}`,
        blend: body.blend ?? [],
        checkpoint_id: "ck",
        latency_ms: 7,
        ...meta,
      };
    },
  };
  return { client, calls };
}

/** Client whose responses are released by hand, for in-flight scenarios. */
function manualClient() {
  const pending: {
    body: RectifyRequestBody;
    resolve: (r: RectifyResponseBody) => void;
    reject: (e: unknown) => void;
  }[] = [];
  const client = {
    rectify(body: RectifyRequestBody): Promise<RectifyResponseBody> {
      return new Promise((resolve, reject) => pending.push({ body, resolve, reject }));
    },
  };
  return { client, pending };
}

function respOf(image: string, blend: number[]): RectifyResponseBody {
  return { image, blend, checkpoint_id: "ck", latency_ms: 5 };
}

async function microtasks(): Promise<void> {
  for (let i = 0; i < 6; i += 1) {
    await Promise.resolve();
  }
}

describe("TunerController", () => {
  it("sends nothing until an image is loaded", async () => {
    const { client, calls } = autoClient();
    const { view } = stubView();
    const c = new TunerController(client, view);
    c.setSlider(3);
    await vi.advanceTimersByTimeAsync(1000);
    expect(calls).toHaveLength(0);
  });

  it("collapses a burst of slider moves into a single request", async () => {
    const { client, calls } = autoClient();
    const { view, results } = stubView();
    const c = new TunerController(client, view);

    c.setImage("fisheye-b64");
    await microtasks();
    expect(calls).toHaveLength(1);

    c.setSlider(3);
    c.setSlider(4.5);
    c.setSlider(7);
    expect(calls).toHaveLength(1);
    await vi.advanceTimersByTimeAsync(250);
    await microtasks();
    expect(calls).toHaveLength(2);
    expect(calls[1].blend).toEqual(sliderToBlend(7));
    expect(results.at(-1)?.image).toBe("img-2");
  });

  it("drops the reply of a superseded request instead of displaying it", async () => {
    const { client, pending } = manualClient();
    const { view, results } = stubView();
    const c = new TunerController(client, view);

    c.setImage("fisheye-b64");
    expect(pending).toHaveLength(1);

    // slider moves while the first request is still in flight
    c.setSlider(7);
    await vi.advanceTimersByTimeAsync(250);
    expect(pending).toHaveLength(1);

    pending[0].resolve(respOf("stale-image", sliderToBlend(5)));
    await microtasks();
    // the stale reply was discarded and a fresh request went out
    expect(results).toHaveLength(0);
    expect(pending).toHaveLength(2);
    expect(pending[1].body.blend).toEqual(sliderToBlend(7));

    pending[1].resolve(respOf("fresh-image", sliderToBlend(7)));
    await microtasks();
    expect(results.map((r) => r.image)).toEqual(["fresh-image"]);
    expect(results[0].slider).toBe(7);
  });

  it("keeps a pinned image unchanged across later slider moves", async () => {
    const { client } = autoClient();
    const { view, results } = stubView();
    const c = new TunerController(client, view);

    c.setImage("fisheye-b64");
    await microtasks();
    expect(c.pinCurrent()).toBe(true);
    const pinnedImage = c.pins.list()[0].image;

    c.setSlider(7);
    await vi.advanceTimersByTimeAsync(250);
    await microtasks();
    expect(results.at(-1)?.image).not.toBe(pinnedImage);
    expect(c.pins.list()[0].image).toBe(pinnedImage);
  });

  it("cannot pin before a result and respects the pin capacity", async () => {
    const { client } = autoClient();
    const { view } = stubView();
    const c = new TunerController(client, view);
    expect(c.pinCurrent()).toBe(false);

    c.setImage("fisheye-b64");
    await microtasks();
    expect(c.pinCurrent()).toBe(true);
    expect(c.pinCurrent()).toBe(true);
    expect(c.pinCurrent()).toBe(true);
    expect(c.pinCurrent()).toBe(false);
  });

  it("passes psnr and ssim through verbatim, including the inf string", async () => {
    const { client } = autoClient({ psnr: 23.456789, ssim: 0.9125 });
    const { view, results } = stubView();
    const c = new TunerController(client, view);
    c.setGt("gt-b64");
    c.setImage("fisheye-b64");
    await microtasks();
    expect(results[0].psnr).toBe(23.456789);
    expect(results[0].ssim).toBe(0.9125);

    const inf = autoClient({ psnr: "inf", ssim: 1.0 });
    const second = stubView();
    const c2 = new TunerController(inf.client, second.view);
    c2.setGt("gt-b64");
    c2.setImage("fisheye-b64");
    await microtasks();
    expect(second.results[0].psnr).toBe("inf");
    expect(inf.calls[0].return_metrics).toBe(true);
    expect(inf.calls[0].gt).toBe("gt-b64");
  });

  it("surfaces service errors as banners and recovers on the next move", async () => {
    const { client, pending } = manualClient();
    const { view, results, errors } = stubView();
    const c = new TunerController(client, view);

    c.setImage("fisheye-b64");
    pending[0].reject(new ServiceError(400, "invalid_blend", "weights must sum to 1"));
    await microtasks();
    expect(errors).toEqual(["invalid_blend: weights must sum to 1"]);
    expect(results).toHaveLength(0);

    c.setSlider(2);
    await vi.advanceTimersByTimeAsync(250);
    expect(pending).toHaveLength(2);
    pending[1].resolve(respOf("ok-image", sliderToBlend(2)));
    await microtasks();
    expect(results.map((r) => r.image)).toEqual(["ok-image"]);
  });

  it("normalizes advanced weights before sending and flags them sliderless", async () => {
    const { client, calls } = autoClient();
    const { view, results } = stubView();
    const c = new TunerController(client, view);
    c.setImage("fisheye-b64");
    await microtasks();

    const applied = c.setAdvancedBlend([2, 0, 0, 0, 0, 0, 0, 0, 6]);
    expect(applied).not.toBeNull();
    expect(applied![0]).toBeCloseTo(0.25, 15);
    await vi.advanceTimersByTimeAsync(250);
    await microtasks();
    expect(calls).toHaveLength(2);
    expect(calls[1].blend?.reduce((a, b) => a + b, 0)).toBeCloseTo(1, 12);
    expect(results.at(-1)?.slider).toBeNull();
  });

  it("rejects impossible advanced weights locally without a request", async () => {
    const { client, calls } = autoClient();
    const { view, errors } = stubView();
    const c = new TunerController(client, view);
    c.setImage("fisheye-b64");
    await microtasks();

    expect(c.setAdvancedBlend([-1, 0, 0, 0, 0, 0, 0, 0, 0])).toBeNull();
    expect(c.setAdvancedBlend([0, 0, 0, 0, 0, 0, 0, 0, 0])).toBeNull();
    await vi.advanceTimersByTimeAsync(1000);
    expect(calls).toHaveLength(1);
    expect(errors).toHaveLength(2);
  });

  it("returning to the slider leaves advanced mode", async () => {
    const { client } = autoClient();
    const { view } = stubView();
    const c = new TunerController(client, view);
    c.setAdvancedBlend([0, 0, 1, 0, 0, 0, 0, 0, 0]);
    expect(c.currentBlend()[2]).toBe(1);
    c.setSlider(2);
    expect(c.currentBlend()).toEqual(sliderToBlend(2));
  });

  it("clamps out-of-range slider values and reports it", () => {
    const { client } = autoClient();
    const { view } = stubView();
    const c = new TunerController(client, view);
    expect(c.setSlider(12)).toEqual({ value: 9, clamped: true });
    expect(c.slider).toBe(9);
    expect(c.setSlider(4.5)).toEqual({ value: 4.5, clamped: false });
  });
});
