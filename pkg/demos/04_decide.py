"""Satisfiability and equivalence, with witnesses."""

from xpd import equiv_node, equiv_path, parse_node, parse_path, print_tree, sat, valid

AB = ["a", "b"]

for text in ["a & !a", "<down != down> & !<down[a]>", "<down[a]/down[b] = eps>"]:
    v = sat(parse_node(text, AB), "full", AB)
    extra = f" via {v.method}, model {print_tree(v.model)}" if v.sat else ""
    print(f"sat {text}: {v}{extra}")

print("valid <down = eps> | !<down = eps>:", valid(parse_node("<down = eps> | !<down = eps>", AB)))

abc = ["a", "b", "c"]
v = equiv_node(parse_node("!a", abc), parse_node("(b & <eps=eps>) | (c & <eps=eps>)", abc), "eq", abc)
print("!a against b or c:", v)

e1, e2 = parse_node("<down[a]/down[b] = eps>", AB), parse_node("<down[a & <down[b]>] = eps>", AB)
v = equiv_node(e1, e2, "eq", AB)
print(f"{e1} against {e2}: {v}, the {v.side} side holds on {print_tree(v.tree)}")

v = equiv_path(parse_path("down/[a]", AB), parse_path("down", AB), "eq", AB)
print("down/[a] against down:", v, "on", print_tree(v.tree), "pair", v.pair)
