export const MAX_PINS = 3;

export interface PinSnapshot {
  slider: number;
  blend: number[];
  image: string;
  psnr: number | string | null;
  ssim: number | string | null;
}

/**
 * Up to MAX_PINS frozen comparison snapshots. pin() deep-copies and freezes,
 * so later slider moves or edits to the source object cannot change a pin.
 */
export class PinBoard {
  private slots: Readonly<PinSnapshot>[] = [];

  pin(snap: PinSnapshot): Readonly<PinSnapshot> | null {
    if (this.slots.length >= MAX_PINS) {
      return null;
    }
    const copy: PinSnapshot = {
      slider: snap.slider,
      blend: Object.freeze([...snap.blend]) as number[],
      image: snap.image,
      psnr: snap.psnr,
      ssim: snap.ssim,
    };
    const frozen = Object.freeze(copy);
    this.slots.push(frozen);
    return frozen;
  }

  unpin(index: number): boolean {
    if (index < 0 || index >= this.slots.length) {
      return false;
    }
    this.slots.splice(index, 1);
    return true;
  }

  list(): readonly Readonly<PinSnapshot>[] {
    return [...this.slots];
  }

  get full(): boolean {
    return this.slots.length >= MAX_PINS;
  }

  get count(): number {
    return this.slots.length;
  }
}
