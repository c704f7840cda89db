"""Evaluate node expressions on a small data tree.

The tree has an a-root in class 0, an a-child in class 0 with a b-child in
class 1, and a b-child in class 1.
"""

from xpd import eval_node, parse_node, parse_tree, print_tree, restrict

AB = ["a", "b"]
t = parse_tree("(a 0 (a 0 (b 1)) (b 1))", AB)
print("tree:", print_tree(t))

for text in [
    "<down = down[a]/down[b]>",
    "<eps = down/down>",
    "!<down/down != down/down>",
    "<down[a]/down[b] = eps>",
    "<down[a & <down[b]>] = eps>",
]:
    print(f"  {text:32} {eval_node(t, t.root, parse_node(text, AB))}")

# truth at a node only depends on the subtree below it
x = t.node_at([0])
phi = parse_node("<down[b] != eps>", AB)
print("\nsubtree at child 0:", print_tree(restrict(t, x)))
print("  same answer in the whole tree and in the subtree:",
      eval_node(t, x, phi), eval_node(restrict(t, x), x, phi))
