import { describe, expect, it } from "vitest";
import { SmilesError, parseSmiles } from "../src/mol.js";

describe("parseSmiles", () => {
  it("parses ethanol with implicit hydrogens", () => {
    const g = parseSmiles("CCO");
    expect(g.atoms).toHaveLength(3);
    expect(g.bonds).toHaveLength(2);
    expect(g.atoms.map((a) => a.implicitH)).toEqual([3, 2, 1]);
  });

  it("perceives benzene aromaticity", () => {
    const g = parseSmiles("c1ccccc1");
    expect(g.atoms.every((a) => a.aromatic)).toBe(true);
    expect(g.bonds.every((b) => b.aromatic)).toBe(true);
    expect(g.rings).toHaveLength(1);
    expect(g.rings[0]).toMatchObject({ size: 6, aromatic: true });
  });

  it("computes topological distances", () => {
    const g = parseSmiles("CCCCO");
    expect(g.distances[0][4]).toBe(4);
    expect(g.distances[1][3]).toBe(2);
  });

  it("handles disconnected components", () => {
    const g = parseSmiles("CCO.C");
    expect(g.distances[0][3]).toBe(-1);
  });

  it("keeps charges from bracket atoms", () => {
    const g = parseSmiles("[NH4+]");
    expect(g.atoms[0].charge).toBe(1);
    expect(g.atoms[0].implicitH).toBe(4);
  });

  it("rejects malformed input", () => {
    expect(() => parseSmiles("C(")).toThrow(SmilesError);
    expect(() => parseSmiles("")).toThrow(SmilesError);
  });
});
