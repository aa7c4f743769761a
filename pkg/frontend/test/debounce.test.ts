import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { debounce } from "../src/debounce.js";

beforeEach(() => {
  vi.useFakeTimers();
});

afterEach(() => {
  vi.useRealTimers();
});

describe("debounce", () => {
  it("collapses a burst into one trailing call with the last arguments", () => {
    const calls: number[] = [];
    const d = debounce((v: number) => calls.push(v), 250);
    d(1);
    vi.advanceTimersByTime(100);
    d(2);
    vi.advanceTimersByTime(100);
    d(3);
    expect(calls).toEqual([]);
    vi.advanceTimersByTime(249);
    expect(calls).toEqual([]);
    vi.advanceTimersByTime(1);
    expect(calls).toEqual([3]);
    vi.advanceTimersByTime(1000);
    expect(calls).toEqual([3]);
  });

  it("fires separately for calls spaced beyond the wait", () => {
    const calls: number[] = [];
    const d = debounce((v: number) => calls.push(v), 250);
    d(1);
    vi.advanceTimersByTime(250);
    d(2);
    vi.advanceTimersByTime(250);
    expect(calls).toEqual([1, 2]);
  });

  it("cancel drops the pending call", () => {
    const fn = vi.fn();
    const d = debounce(fn, 250);
    d();
    expect(d.pending()).toBe(true);
    d.cancel();
    expect(d.pending()).toBe(false);
    vi.advanceTimersByTime(1000);
    expect(fn).not.toHaveBeenCalled();
  });

  it("flush fires immediately and only once", () => {
    const fn = vi.fn();
    const d = debounce(fn, 250);
    d();
    d.flush();
    expect(fn).toHaveBeenCalledTimes(1);
    vi.advanceTimersByTime(1000);
    expect(fn).toHaveBeenCalledTimes(1);
  });

  it("flush without a pending call is a no-op", () => {
    const fn = vi.fn();
    const d = debounce(fn, 250);
    d.flush();
    expect(fn).not.toHaveBeenCalled();
  });
});
