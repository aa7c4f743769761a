import { describe, expect, it } from "vitest";

import { RequestSequencer } from "../src/requests.js";

describe("RequestSequencer", () => {
  it("hands out strictly increasing ids", () => {
    const seq = new RequestSequencer();
    expect(seq.begin()).toBe(1);
    expect(seq.begin()).toBe(2);
    expect(seq.begin()).toBe(3);
    expect(seq.latest).toBe(3);
  });

  it("only the most recent id is current", () => {
    const seq = new RequestSequencer();
    const a = seq.begin();
    const b = seq.begin();
    expect(seq.isCurrent(a)).toBe(false);
    expect(seq.isCurrent(b)).toBe(true);
  });

  it("marks late arrivals from superseded requests as stale", () => {
    const seq = new RequestSequencer();
    const first = seq.begin();
    const second = seq.begin();
    // second's reply lands first and is shown; first's reply is then stale
    expect(seq.isCurrent(second)).toBe(true);
    expect(seq.isCurrent(first)).toBe(false);
  });
});
