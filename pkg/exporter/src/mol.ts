/**
 * Thin molecular-graph view over openchemlib: heavy atoms with implicit
 * hydrogen counts, typed bonds, topological distances, and ring info.
 */

import * as OCL from "openchemlib";

export interface Atom {
  index: number;
  symbol: string;
  atomicNo: number;
  charge: number;
  aromatic: boolean;
  implicitH: number;
  inRing: boolean;
}

export interface Bond {
  a: number;
  b: number;
  order: number;
  aromatic: boolean;
  inRing: boolean;
}

export interface RingInfo {
  size: number;
  aromatic: boolean;
  atoms: number[];
}

export interface MolGraph {
  smiles: string;
  atoms: Atom[];
  bonds: Bond[];
  neighbors: number[][];
  /** topological distances between heavy atoms; -1 when disconnected */
  distances: number[][];
  ringCount: number;
  rings: RingInfo[];
}

export class SmilesError extends Error {}

export function parseSmiles(smiles: string): MolGraph {
  if (!smiles.trim()) {
    throw new SmilesError("empty SMILES string");
  }
  // the underlying parser quietly drops an unclosed branch; reject it here
  let depth = 0;
  for (const ch of smiles) {
    if (ch === "(") depth += 1;
    else if (ch === ")") depth -= 1;
    if (depth < 0) throw new SmilesError(
      `unbalanced ')' in SMILES ${JSON.stringify(smiles)}`);
  }
  if (depth !== 0) {
    throw new SmilesError(`unclosed '(' in SMILES ${JSON.stringify(smiles)}`);
  }
  let mol: OCL.Molecule;
  try {
    mol = OCL.Molecule.fromSmiles(smiles);
  } catch (err) {
    throw new SmilesError(`cannot parse SMILES ${JSON.stringify(smiles)}: ${err}`);
  }
  mol.ensureHelperArrays(OCL.Molecule.cHelperRings);
  const n = mol.getAtoms();
  if (n === 0) {
    throw new SmilesError(`SMILES ${JSON.stringify(smiles)} has no atoms`);
  }
  const atoms: Atom[] = [];
  for (let i = 0; i < n; i++) {
    atoms.push({
      index: i,
      symbol: mol.getAtomLabel(i),
      atomicNo: mol.getAtomicNo(i),
      charge: mol.getAtomCharge(i),
      aromatic: mol.isAromaticAtom(i),
      implicitH: mol.getImplicitHydrogens(i),
      inRing: mol.isRingAtom(i),
    });
  }
  const bonds: Bond[] = [];
  const neighbors: number[][] = Array.from({ length: n }, () => []);
  for (let b = 0; b < mol.getBonds(); b++) {
    const a1 = mol.getBondAtom(0, b);
    const a2 = mol.getBondAtom(1, b);
    if (a1 >= n || a2 >= n) continue; // explicit hydrogens stay out of the graph
    bonds.push({
      a: a1,
      b: a2,
      order: mol.getBondOrder(b),
      aromatic: mol.isAromaticBond(b),
      inRing: mol.isRingBond(b),
    });
    neighbors[a1].push(a2);
    neighbors[a2].push(a1);
  }
  const ringSet = mol.getRingSet();
  const rings: RingInfo[] = [];
  for (let r = 0; r < ringSet.getSize(); r++) {
    const size = ringSet.getRingSize(r);
    const ringAtoms: number[] = [];
    const raw = ringSet.getRingAtoms(r);
    for (let k = 0; k < size; k++) ringAtoms.push(raw[k]);
    rings.push({ size, aromatic: ringSet.isAromatic(r), atoms: ringAtoms });
  }
  return {
    smiles,
    atoms,
    bonds,
    neighbors,
    distances: allPairsDistances(n, neighbors),
    ringCount: rings.length,
    rings,
  };
}

function allPairsDistances(n: number, neighbors: number[][]): number[][] {
  const dist: number[][] = Array.from({ length: n }, () =>
    new Array<number>(n).fill(-1),
  );
  for (let src = 0; src < n; src++) {
    dist[src][src] = 0;
    const queue = [src];
    for (let head = 0; head < queue.length; head++) {
      const cur = queue[head];
      for (const nb of neighbors[cur]) {
        if (dist[src][nb] === -1) {
          dist[src][nb] = dist[src][cur] + 1;
          queue.push(nb);
        }
      }
    }
  }
  return dist;
}

/** total attached hydrogens (implicit only; inputs never carry explicit H) */
export function hydrogenCount(atom: Atom): number {
  return atom.implicitH;
}

/** carbon with only single bonds and no aromatic flag (an sp3 carbon) */
export function isSp3Carbon(g: MolGraph, index: number): boolean {
  const atom = g.atoms[index];
  if (atom.atomicNo !== 6 || atom.aromatic) return false;
  return g.bonds.every(
    (b) => (b.a !== index && b.b !== index) || (b.order === 1 && !b.aromatic),
  );
}

export function bondBetween(g: MolGraph, i: number, j: number): Bond | undefined {
  return g.bonds.find(
    (b) => (b.a === i && b.b === j) || (b.a === j && b.b === i),
  );
}
