"""Normal forms at level 1 and normalization of a formula."""

from xpd import normalize_node, parse_node
from xpd.normal_form import enum_D, enum_N, enum_P

AB = ["a", "b"]

for fragment in ("eq", "full"):
    paths, atoms = enum_P(1, fragment, AB), enum_D(1, fragment, AB)
    forms = list(enum_N(1, fragment, AB))
    print(f"[{fragment}] {len(paths)} paths, {len(atoms)} diamond atoms, {len(forms)} consistent normal forms")
    print("  paths:", ", ".join(str(p) for p in paths))

phi = parse_node("<[a]/down[a] = down[b]> & !<eps = down[a]>", AB, "eq")
log: list[str] = []
forms = normalize_node(phi, "eq", AB, log=log)
print(f"\n{phi} has {len(forms)} disjuncts:")
for f in forms:
    print("  ", f)
print("rules used:", ", ".join(dict.fromkeys(log)))
