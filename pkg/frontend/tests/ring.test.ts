import { describe, expect, it } from "vitest";

import { RingBuffer } from "../src/ring.js";

describe("RingBuffer", () => {
  it("holds items in insertion order", () => {
    const ring = new RingBuffer<number>(4);
    ring.push(1);
    ring.push(2);
    ring.push(3);
    expect(ring.toArray()).toEqual([1, 2, 3]);
    expect(ring.last()).toBe(3);
  });

  it("evicts the oldest when full", () => {
    const ring = new RingBuffer<number>(3);
    for (let i = 0; i < 7; i++) ring.push(i);
    expect(ring.toArray()).toEqual([4, 5, 6]);
    expect(ring.length).toBe(3);
  });

  it("never exceeds capacity", () => {
    const ring = new RingBuffer<number>(16);
    for (let i = 0; i < 10_000; i++) {
      ring.push(i);
      expect(ring.length).toBeLessThanOrEqual(16);
    }
  });

  it("rejects bad capacities", () => {
    expect(() => new RingBuffer(0)).toThrow(RangeError);
    expect(() => new RingBuffer(-1)).toThrow(RangeError);
    expect(() => new RingBuffer(2.5)).toThrow(RangeError);
  });

  it("bounds-checks indexed access", () => {
    const ring = new RingBuffer<number>(2);
    ring.push(9);
    expect(ring.at(0)).toBe(9);
    expect(() => ring.at(1)).toThrow(RangeError);
    expect(() => ring.at(-1)).toThrow(RangeError);
  });

  it("clear empties without changing capacity", () => {
    const ring = new RingBuffer<number>(3);
    ring.push(1);
    ring.clear();
    expect(ring.length).toBe(0);
    ring.push(7);
    expect(ring.toArray()).toEqual([7]);
  });
});
