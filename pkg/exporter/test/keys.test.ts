import { describe, expect, it } from "vitest";
import { KEY_COUNT, KEY_DEFINITIONS, computeKeys } from "../src/keys.js";
import { parseSmiles } from "../src/mol.js";

const keys = (smiles: string) => computeKeys(parseSmiles(smiles));

function bit(bits: number[], position: number): number {
  return bits[position - 1];
}

describe("structural keys", () => {
  it("emits exactly 166 binary values", () => {
    const bits = keys("CCO");
    expect(bits).toHaveLength(KEY_COUNT);
    expect(bits.every((b) => b === 0 || b === 1)).toBe(true);
  });

  it("element presence keys", () => {
    const bits = keys("Clc1ccccc1");
    expect(bit(bits, 9)).toBe(1); // chlorine
    expect(bit(bits, 12)).toBe(1); // any halogen
    expect(bit(bits, 5)).toBe(0); // no fluorine
    expect(bit(keys("CCO"), 12)).toBe(0);
  });

  it("ring keys on benzene", () => {
    const bits = keys("c1ccccc1");
    expect(bit(bits, 41)).toBe(1); // any ring
    expect(bit(bits, 46)).toBe(1); // 6-membered
    expect(bit(bits, 49)).toBe(1); // aromatic ring
    expect(bit(bits, 55)).toBe(1); // carbocycle
    expect(bit(bits, 43)).toBe(0); // no 3-ring
  });

  it("functional group keys", () => {
    expect(bit(keys("CC(=O)O"), 96)).toBe(1); // carboxylic acid
    expect(bit(keys("CCO"), 100)).toBe(1); // alcohol on sp3 carbon
    expect(bit(keys("Oc1ccccc1"), 101)).toBe(1); // phenol
    expect(bit(keys("COC"), 99)).toBe(1); // ether
    expect(bit(keys("CC(=O)OC"), 97)).toBe(1); // ester
    expect(bit(keys("CC(=O)N"), 98)).toBe(1); // amide
    expect(bit(keys("CCO"), 96)).toBe(0);
  });

  it("halogen placement keys", () => {
    expect(bit(keys("Clc1ccccc1"), 102)).toBe(1); // on aromatic
    expect(bit(keys("CCCl"), 103)).toBe(1); // on sp3 carbon
    expect(bit(keys("CCCl"), 102)).toBe(0);
  });

  it("every implemented key position is within range and documented", () => {
    for (const [position, [doc]] of KEY_DEFINITIONS) {
      expect(position).toBeGreaterThanOrEqual(1);
      expect(position).toBeLessThanOrEqual(KEY_COUNT);
      expect(doc.length).toBeGreaterThan(3);
    }
  });

  it("keys are deterministic", () => {
    expect(keys("CCCCCCCCO")).toEqual(keys("CCCCCCCCO"));
  });
});
