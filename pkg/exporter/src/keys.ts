/**
 * 166-bit structural key fingerprint.
 *
 * Each implemented position tests one documented structural feature in the
 * spirit of the classic 166-key dictionaries: element presence and counts,
 * ring topology, common functional groups, and simple neighborhood
 * patterns. Positions whose classic definitions need full substructure
 * query semantics beyond this exporter emit a constant 0; the complete
 * position->meaning map is the KEY_DEFINITIONS table below.
 */

import { Atom, Bond, MolGraph, bondBetween, hydrogenCount, isSp3Carbon } from "./mol.js";

export const KEY_COUNT = 166;

type Predicate = (g: MolGraph) => boolean;

const HALOGENS = new Set([9, 17, 35, 53]);

function hasElement(z: number): Predicate {
  return (g) => g.atoms.some((a) => a.atomicNo === z);
}

function elementAtLeast(z: number, n: number): Predicate {
  return (g) => g.atoms.filter((a) => a.atomicNo === z).length >= n;
}

function bondMatch(
  z1: number,
  z2: number,
  order: number,
  aromatic = false,
): Predicate {
  return (g) =>
    g.bonds.some((b) => {
      const za = g.atoms[b.a].atomicNo;
      const zb = g.atoms[b.b].atomicNo;
      const pair =
        (za === z1 && zb === z2) || (za === z2 && zb === z1);
      return pair && (aromatic ? b.aromatic : b.order === order && !b.aromatic);
    });
}

function atomWhere(test: (g: MolGraph, a: Atom) => boolean): Predicate {
  return (g) => g.atoms.some((a) => test(g, a));
}

function countWhere(
  test: (g: MolGraph, a: Atom) => boolean,
  n: number,
): Predicate {
  return (g) => g.atoms.filter((a) => test(g, a)).length >= n;
}

const isMethyl = (g: MolGraph, a: Atom) =>
  a.atomicNo === 6 && !a.aromatic && hydrogenCount(a) === 3;

const isHydroxyl = (g: MolGraph, a: Atom) =>
  a.atomicNo === 8 && hydrogenCount(a) === 1 && g.neighbors[a.index].length === 1;

function carbonylCarbons(g: MolGraph): number[] {
  return g.atoms
    .filter(
      (a) =>
        a.atomicNo === 6 &&
        g.neighbors[a.index].some((nb) => {
          const bond = bondBetween(g, a.index, nb);
          return g.atoms[nb].atomicNo === 8 && bond?.order === 2;
        }),
    )
    .map((a) => a.index);
}

function carbonylWithSingle(g: MolGraph, c: number, z: number): number[] {
  return g.neighbors[c].filter((nb) => {
    const bond = bondBetween(g, c, nb);
    return g.atoms[nb].atomicNo === z && bond?.order === 1 && !bond.aromatic;
  });
}

const hasCarboxylicAcid: Predicate = (g) =>
  carbonylCarbons(g).some((c) =>
    carbonylWithSingle(g, c, 8).some((o) => isHydroxyl(g, g.atoms[o])),
  );

const hasEster: Predicate = (g) =>
  carbonylCarbons(g).some((c) =>
    carbonylWithSingle(g, c, 8).some(
      (o) => g.neighbors[o].length === 2,
    ),
  );

const hasAmide: Predicate = (g) =>
  carbonylCarbons(g).some((c) => carbonylWithSingle(g, c, 7).length > 0);

const hasEther: Predicate = (g) =>
  g.atoms.some(
    (a) =>
      a.atomicNo === 8 &&
      hydrogenCount(a) === 0 &&
      g.neighbors[a.index].length === 2 &&
      g.neighbors[a.index].every((nb) => g.atoms[nb].atomicNo === 6) &&
      g.neighbors[a.index].every(
        (nb) => bondBetween(g, a.index, nb)?.order === 1,
      ),
  );

const ringOfSize = (k: number): Predicate => (g) =>
  g.rings.some((r) => r.size === k);

const aromaticRingCount = (n: number): Predicate => (g) =>
  g.rings.filter((r) => r.aromatic).length >= n;

const heteroRing: Predicate = (g) =>
  g.rings.some((r) => r.atoms.some((i) => g.atoms[i].atomicNo !== 6));

const elementInRing = (z: number): Predicate => (g) =>
  g.atoms.some((a) => a.atomicNo === z && a.inRing);

const carbocycle6: Predicate = (g) =>
  g.rings.some((r) => r.size === 6 && r.atoms.every((i) => g.atoms[i].atomicNo === 6));

const longestChainAtLeast = (k: number): Predicate => (g) => {
  let best = 0;
  for (const row of g.distances) {
    for (const d of row) best = Math.max(best, d);
  }
  return best >= k;
};

const componentCount = (g: MolGraph): number => {
  const seen = new Array<boolean>(g.atoms.length).fill(false);
  let parts = 0;
  for (let i = 0; i < g.atoms.length; i++) {
    if (seen[i]) continue;
    parts += 1;
    const queue = [i];
    seen[i] = true;
    for (let h = 0; h < queue.length; h++) {
      for (const nb of g.neighbors[queue[h]]) {
        if (!seen[nb]) {
          seen[nb] = true;
          queue.push(nb);
        }
      }
    }
  }
  return parts;
};

/** position (1-based) -> [meaning, predicate]; unlisted positions emit 0 */
export const KEY_DEFINITIONS: ReadonlyMap<number, [string, Predicate]> =
  new Map<number, [string, Predicate]>([
    // elements
    [1, ["boron present", hasElement(5)]],
    [2, ["carbon present", hasElement(6)]],
    [3, ["nitrogen present", hasElement(7)]],
    [4, ["oxygen present", hasElement(8)]],
    [5, ["fluorine present", hasElement(9)]],
    [6, ["silicon present", hasElement(14)]],
    [7, ["phosphorus present", hasElement(15)]],
    [8, ["sulfur present", hasElement(16)]],
    [9, ["chlorine present", hasElement(17)]],
    [10, ["bromine present", hasElement(35)]],
    [11, ["iodine present", hasElement(53)]],
    [12, ["any halogen present",
          (g) => g.atoms.some((a) => HALOGENS.has(a.atomicNo))]],
    [13, ["charged atom present", atomWhere((_, a) => a.charge !== 0)]],
    [14, ["positively charged atom", atomWhere((_, a) => a.charge > 0)]],
    [15, ["negatively charged atom", atomWhere((_, a) => a.charge < 0)]],
    // element counts
    [21, ["at least 2 carbons", elementAtLeast(6, 2)]],
    [22, ["at least 4 carbons", elementAtLeast(6, 4)]],
    [23, ["at least 6 carbons", elementAtLeast(6, 6)]],
    [24, ["at least 8 carbons", elementAtLeast(6, 8)]],
    [25, ["at least 2 nitrogens", elementAtLeast(7, 2)]],
    [26, ["at least 2 oxygens", elementAtLeast(8, 2)]],
    [27, ["at least 3 oxygens", elementAtLeast(8, 3)]],
    [28, ["at least 2 halogens",
          (g) => g.atoms.filter((a) => HALOGENS.has(a.atomicNo)).length >= 2]],
    [29, ["at least 10 heavy atoms", (g) => g.atoms.length >= 10]],
    [30, ["at least 16 heavy atoms", (g) => g.atoms.length >= 16]],
    [31, ["at least 2 heteroatoms",
          (g) => g.atoms.filter((a) => a.atomicNo !== 6).length >= 2]],
    [32, ["more than one fragment", (g) => componentCount(g) > 1]],
    // rings
    [41, ["any ring", (g) => g.rings.length > 0]],
    [42, ["at least 2 rings", (g) => g.rings.length >= 2]],
    [43, ["3-membered ring", ringOfSize(3)]],
    [44, ["4-membered ring", ringOfSize(4)]],
    [45, ["5-membered ring", ringOfSize(5)]],
    [46, ["6-membered ring", ringOfSize(6)]],
    [47, ["7-membered ring", ringOfSize(7)]],
    [48, ["8-membered or larger ring", (g) => g.rings.some((r) => r.size >= 8)]],
    [49, ["aromatic ring", aromaticRingCount(1)]],
    [50, ["at least 2 aromatic rings", aromaticRingCount(2)]],
    [51, ["heteroatom in a ring", heteroRing]],
    [52, ["nitrogen in a ring", elementInRing(7)]],
    [53, ["oxygen in a ring", elementInRing(8)]],
    [54, ["sulfur in a ring", elementInRing(16)]],
    [55, ["six-membered carbocycle", carbocycle6]],
    [56, ["aromatic nitrogen", atomWhere((_, a) => a.atomicNo === 7 && a.aromatic)]],
    [57, ["aromatic oxygen", atomWhere((_, a) => a.atomicNo === 8 && a.aromatic)]],
    [58, ["non-aromatic ring", (g) => g.rings.some((r) => !r.aromatic)]],
    [59, ["5-membered aromatic ring",
          (g) => g.rings.some((r) => r.size === 5 && r.aromatic)]],
    [60, ["6-membered aromatic ring",
          (g) => g.rings.some((r) => r.size === 6 && r.aromatic)]],
    // bonds and functional groups
    [81, ["carbonyl C=O", (g) => carbonylCarbons(g).length > 0]],
    [82, ["C-O single bond", bondMatch(6, 8, 1)]],
    [83, ["C=C double bond", bondMatch(6, 6, 2)]],
    [84, ["C#C triple bond", bondMatch(6, 6, 3)]],
    [85, ["C#N triple bond", bondMatch(6, 7, 3)]],
    [86, ["C=N double bond", bondMatch(6, 7, 2)]],
    [87, ["C-N single bond", bondMatch(6, 7, 1)]],
    [88, ["N-O bond", (g) => bondMatch(7, 8, 1)(g) || bondMatch(7, 8, 2)(g)]],
    [89, ["S=O double bond", bondMatch(16, 8, 2)]],
    [90, ["C-S single bond", bondMatch(6, 16, 1)]],
    [91, ["hydroxyl group", atomWhere(isHydroxyl)]],
    [92, ["N-H present",
          atomWhere((_, a) => a.atomicNo === 7 && hydrogenCount(a) > 0)]],
    [93, ["methyl group", atomWhere(isMethyl)]],
    [94, ["at least 2 methyl groups", countWhere(isMethyl, 2)]],
    [95, ["primary amine NH2 on sp3 carbon",
          (g) => g.atoms.some((a) =>
            a.atomicNo === 7 && hydrogenCount(a) === 2 &&
            g.neighbors[a.index].length === 1 &&
            isSp3Carbon(g, g.neighbors[a.index][0]))]],
    [96, ["carboxylic acid", hasCarboxylicAcid]],
    [97, ["ester", hasEster]],
    [98, ["amide", hasAmide]],
    [99, ["ether C-O-C", hasEther]],
    [100, ["alcohol on sp3 carbon",
           (g) => g.atoms.some((a) =>
             isHydroxyl(g, a) && isSp3Carbon(g, g.neighbors[a.index][0]))]],
    [101, ["phenol: hydroxyl on aromatic carbon",
           (g) => g.atoms.some((a) =>
             isHydroxyl(g, a) && g.atoms[g.neighbors[a.index][0]].aromatic)]],
    [102, ["halogen on aromatic atom",
           (g) => g.bonds.some((b) => {
             const za = g.atoms[b.a];
             const zb = g.atoms[b.b];
             return (HALOGENS.has(za.atomicNo) && zb.aromatic) ||
               (HALOGENS.has(zb.atomicNo) && za.aromatic);
           })]],
    [103, ["halogen on sp3 carbon",
           (g) => g.bonds.some((b) => {
             const pair: [Atom, Atom] = [g.atoms[b.a], g.atoms[b.b]];
             for (const [x, y] of [pair, [pair[1], pair[0]] as [Atom, Atom]]) {
               if (HALOGENS.has(x.atomicNo) && isSp3Carbon(g, y.index)) return true;
             }
             return false;
           })]],
    [104, ["aldehyde: carbonyl carbon bearing H",
           (g) => carbonylCarbons(g).some(
             (c) => hydrogenCount(g.atoms[c]) >= 1)]],
    [105, ["ketone: carbonyl carbon with two carbon neighbors",
           (g) => carbonylCarbons(g).some(
             (c) => carbonylWithSingle(g, c, 6).length >= 2)]],
    [106, ["quaternary carbon: 4 heavy carbon neighbors",
           atomWhere((g, a) => a.atomicNo === 6 &&
             g.neighbors[a.index].filter(
               (nb) => g.atoms[nb].atomicNo === 6).length >= 4)]],
    [107, ["branching atom with 3+ heavy neighbors",
           atomWhere((g, a) => g.neighbors[a.index].length >= 3)]],
    [108, ["atom with 4+ heavy neighbors",
           atomWhere((g, a) => g.neighbors[a.index].length >= 4)]],
    // topology
    [121, ["topological distance >= 5 between heavy atoms", longestChainAtLeast(5)]],
    [122, ["topological distance >= 7 between heavy atoms", longestChainAtLeast(7)]],
    [123, ["at least 2 double bonds",
           (g) => g.bonds.filter((b) => b.order === 2 && !b.aromatic).length >= 2]],
    [124, ["heteroatom neighbors a heteroatom",
           (g) => g.bonds.some((b) =>
             g.atoms[b.a].atomicNo !== 6 && g.atoms[b.b].atomicNo !== 6)]],
    [125, ["CH2 chain of length >= 2",
           (g) => g.bonds.some((b) => {
             const ch2 = (a: Atom) => a.atomicNo === 6 && !a.aromatic &&
               hydrogenCount(a) === 2;
             return ch2(g.atoms[b.a]) && ch2(g.atoms[b.b]);
           })]],
    [126, ["carbon bonded to 2+ oxygens",
           atomWhere((g, a) => a.atomicNo === 6 &&
             g.neighbors[a.index].filter(
               (nb) => g.atoms[nb].atomicNo === 8).length >= 2)]],
    [127, ["nitrogen bonded to 2+ carbons",
           atomWhere((g, a) => a.atomicNo === 7 &&
             g.neighbors[a.index].filter(
               (nb) => g.atoms[nb].atomicNo === 6).length >= 2)]],
    [128, ["oxygen bonded to 2 carbons in a ring",
           atomWhere((g, a) => a.atomicNo === 8 && a.inRing &&
             g.neighbors[a.index].length === 2)]],
  ]);

export function computeKeys(g: MolGraph): number[] {
  const bits = new Array<number>(KEY_COUNT).fill(0);
  for (const [position, [, predicate]] of KEY_DEFINITIONS) {
    bits[position - 1] = predicate(g) ? 1 : 0;
  }
  return bits;
}
