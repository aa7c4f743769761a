import { clampSlider, isConvexBlend, normalizeWeights, sliderToBlend } from "./blend.js";
import type { ClampResult } from "./blend.js";
import type { RectifyResponseBody, TunerClient } from "./client.js";
import { ServiceError } from "./client.js";
import { debounce } from "./debounce.js";
import type { Debounced } from "./debounce.js";
import { PinBoard } from "./pins.js";
import { RequestSequencer } from "./requests.js";

export interface ResultView {
  image: string;
  blend: number[];
  /** Slider position the blend came from; null when the advanced panel set it. */
  slider: number | null;
  psnr: number | string | null;
  ssim: number | string | null;
  latencyMs: number;
  checkpointId: string;
}

export interface TunerView {
  showResult(result: ResultView): void;
  showError(message: string): void;
  showBusy(busy: boolean): void;
}

/**
 * Orchestrates slider moves into rectify calls: debounced sends, at most one
 * request in flight, and results for outdated state are dropped instead of
 * displayed. The DOM layer stays a thin shell around this.
 */
export class TunerController {
  readonly pins = new PinBoard();

  private readonly seq = new RequestSequencer();
  private readonly requestLater: Debounced<[]>;
  private sliderValue = 5;
  private advanced: number[] | null = null;
  private image: string | null = null;
  private gt: string | null = null;
  private inFlight = false;
  private dirty = false;
  private lastShown: ResultView | null = null;

  constructor(
    private readonly client: Pick<TunerClient, "rectify">,
    private readonly view: TunerView,
    waitMs = 250,
  ) {
    this.requestLater = debounce(() => {
      void this.send();
    }, waitMs);
  }

  get slider(): number {
    return this.sliderValue;
  }

  get result(): ResultView | null {
    return this.lastShown;
  }

  /** Blend that the next request will carry. */
  currentBlend(): number[] {
    return this.advanced !== null ? [...this.advanced] : sliderToBlend(this.sliderValue);
  }

  setImage(imageB64: string): void {
    this.image = imageB64;
    this.requestLater();
    this.requestLater.flush();
  }

  setGt(gtB64: string | null): void {
    this.gt = gtB64;
    if (this.image !== null) {
      this.requestLater();
    }
  }

  setSlider(v: number): ClampResult {
    const snapped = clampSlider(v);
    this.sliderValue = snapped.value;
    this.advanced = null;
    if (this.image !== null) {
      this.requestLater();
    }
    return snapped;
  }

  /** Hand-edited 9-weight blend; normalized before use, rejected when impossible. */
  setAdvancedBlend(weights: readonly number[]): number[] | null {
    const normalized = normalizeWeights(weights);
    if (normalized === null || !isConvexBlend(normalized)) {
      this.view.showError("blend weights must be nonnegative, finite, and sum to a positive value");
      return null;
    }
    this.advanced = normalized;
    if (this.image !== null) {
      this.requestLater();
    }
    return [...normalized];
  }

  pinCurrent(): boolean {
    if (this.lastShown === null) {
      return false;
    }
    const pinned = this.pins.pin({
      slider: this.lastShown.slider ?? Number.NaN,
      blend: this.lastShown.blend,
      image: this.lastShown.image,
      psnr: this.lastShown.psnr,
      ssim: this.lastShown.ssim,
    });
    return pinned !== null;
  }

  private async send(): Promise<void> {
    if (this.image === null) {
      return;
    }
    if (this.inFlight) {
      // one request in flight at a time; remember that state moved on
      this.dirty = true;
      return;
    }
    this.inFlight = true;
    const id = this.seq.begin();
    const slider = this.advanced !== null ? null : this.sliderValue;
    const body = {
      image: this.image,
      blend: this.currentBlend(),
      ...(this.gt !== null ? { return_metrics: true, gt: this.gt } : {}),
    };
    this.view.showBusy(true);

    let resp: RectifyResponseBody;
    try {
      resp = await this.client.rectify(body);
    } catch (err) {
      this.inFlight = false;
      if (this.dirty) {
        this.dirty = false;
        void this.send();
        return;
      }
      this.view.showBusy(false);
      if (err instanceof ServiceError) {
        this.view.showError(`${err.code}: ${err.message}`);
      } else {
        this.view.showError(err instanceof Error ? err.message : String(err));
      }
      return;
    }

    this.inFlight = false;
    if (this.dirty || !this.seq.isCurrent(id)) {
      // the slider moved while this request was out; its image is stale
      this.dirty = false;
      void this.send();
      return;
    }
    this.view.showBusy(false);
    this.lastShown = {
      image: resp.image,
      blend: [...resp.blend],
      slider,
      psnr: resp.psnr ?? null,
      ssim: resp.ssim ?? null,
      latencyMs: resp.latency_ms,
      checkpointId: resp.checkpoint_id,
    };
    this.view.showResult(this.lastShown);
  }
}
