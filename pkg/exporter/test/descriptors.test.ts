import { describe, expect, it } from "vitest";
import {
  adjacencySpectrum, autocorrelation, basicSiteCount, computeDescriptors,
} from "../src/descriptors.js";
import { symmetricEigen } from "../src/eigen.js";
import { parseSmiles } from "../src/mol.js";

const descriptors = (smiles: string) => computeDescriptors(parseSmiles(smiles));

describe("atom counting", () => {
  it("ethanol by hand: 2 carbons, 9 atoms with hydrogens", () => {
    const d = descriptors("CCO");
    expect(d.nC).toBe(2);
    expect(d.nAtom).toBe(9); // C2H6O
    expect(d.nHeavyAtom).toBe(3);
    expect(d.nO).toBe(1);
    expect(d.nAromAtom).toBe(0);
  });

  it("benzene by hand: six aromatic atoms and bonds", () => {
    const d = descriptors("c1ccccc1");
    expect(d.nAromAtom).toBe(6);
    expect(d.nAromBond).toBe(6);
    expect(d.nC).toBe(6);
    expect(d.nAtom).toBe(12); // C6H6
    expect(d.nRing).toBe(1);
  });

  it("pyridine keeps its nitrogen aromatic", () => {
    const d = descriptors("c1ccncc1");
    expect(d.nAromAtom).toBe(6);
    expect(d.nN).toBe(1);
  });

  it("molecular weight of ethanol", () => {
    expect(descriptors("CCO").MW).toBeCloseTo(46.069, 3);
  });
});

describe("adjacency spectrum", () => {
  it("path of three atoms has eigenvalues +-sqrt(2), 0", () => {
    const s = adjacencySpectrum(parseSmiles("CCO"));
    expect(s.spMax).toBeCloseTo(Math.SQRT2, 12);
    expect(s.spAbs).toBeCloseTo(2 * Math.SQRT2, 12);
    expect(s.spAD).toBeCloseTo(2 * Math.SQRT2, 12);
    // leading eigenvector (1, sqrt2, 1)/2: VE1 = (2 + sqrt2)/2
    expect(s.ve3).toBeCloseTo(Math.log(0.1 * 3 * (2 + Math.SQRT2) / 2), 12);
  });

  it("benzene cycle has eigenvalues 2,1,1,-1,-1,-2", () => {
    const s = adjacencySpectrum(parseSmiles("c1ccccc1"));
    expect(s.spMax).toBeCloseTo(2.0, 10);
    expect(s.spAbs).toBeCloseTo(8.0, 10);
    // uniform leading eigenvector: VE1 = 6/sqrt(6)
    expect(s.ve3).toBeCloseTo(Math.log(0.1 * 6 * Math.sqrt(6)), 10);
  });

  it("jacobi solver matches a hand 2x2 case", () => {
    const { values } = symmetricEigen([[2, 1], [1, 2]]);
    expect(values[0]).toBeCloseTo(1, 12);
    expect(values[1]).toBeCloseTo(3, 12);
  });
});

describe("autocorrelation", () => {
  it("hexane lag-5: single end-to-end pair of CH3 (delta-v 1 each)", () => {
    const g = parseSmiles("CCCCCC");
    expect(autocorrelation(g, 5)).toBe(1);
    expect(autocorrelation(g, 6)).toBe(0);
  });

  it("pentane lag-4 by hand: CH3..CH3 = 1*1", () => {
    expect(autocorrelation(parseSmiles("CCCCC"), 4)).toBe(1);
  });

  it("octanol has lag-6 mass", () => {
    expect(autocorrelation(parseSmiles("CCCCCCCCO"), 6)).toBeGreaterThan(0);
  });
});

describe("basic sites", () => {
  it("ethylamine: one primary amine", () => {
    expect(basicSiteCount(parseSmiles("CCN"))).toBe(1);
  });

  it("morpholine: one secondary amine", () => {
    expect(basicSiteCount(parseSmiles("C1COCCN1"))).toBe(1);
  });

  it("trimethylamine: one tertiary amine", () => {
    expect(basicSiteCount(parseSmiles("CN(C)C"))).toBe(1);
  });

  it("aniline NH2 sits on an aromatic carbon: not counted", () => {
    expect(basicSiteCount(parseSmiles("Nc1ccccc1"))).toBe(0);
  });

  it("pyridine nitrogen is aromatic: not counted", () => {
    expect(basicSiteCount(parseSmiles("c1ccncc1"))).toBe(0);
  });

  it("ammonium cation counts as charged", () => {
    expect(basicSiteCount(parseSmiles("[NH4+]"))).toBe(1);
  });

  it("acetamidine matches the amidine patterns", () => {
    expect(basicSiteCount(parseSmiles("CC(=N)N"))).toBe(2);
  });
});
