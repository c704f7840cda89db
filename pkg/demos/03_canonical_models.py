"""Build the canonical model of a normal form and watch the construction."""

from xpd import build_model, normalize_node, parse_node, print_tree
from xpd.canonical import hung_subtrees

AB = ["a", "b"]
phi = parse_node("<down[a] != eps> & <down[a] = eps> & <down[b] = down[a]> & !<down[b] = eps>", AB)
for psi in normalize_node(phi, "full", AB)[:2]:
    trace: list[str] = []
    t = build_model(psi, trace)
    print(psi.short())
    for line in trace:
        print("   ", line)
    print("  model:", print_tree(t))
    _, parts = hung_subtrees(psi)
    print(f"  {len(parts)} subtrees hung below the root before gluing\n")
