"""Smoke test for the eatwb Python module. Run from the repository root."""

import eatwb

z2 = eatwb.Theory.bundled("z2vec")
assert z2.validate() == []
status, _ = z2.prove("add(x, add(x, y))", "y")
assert status == "Proved", status

binop = eatwb.Theory.bundled("free_binop")
status, _ = binop.prove("m(x, y)", "m(y, x)")
assert status == "Refuted", status

free = z2.free_model("x:v, y:v", depth=3)
assert free.saturated and free.sizes == [4], (free.saturated, free.sizes)

assert z2.verify_maltsev_term("v", "add(add(x, y), z)")
assert eatwb.Theory.bundled("groups").find_maltsev_term("g") is not None
assert eatwb.Theory.bundled("gamma0").find_maltsev_term("star") is None

rel = eatwb.Relation.load("fixtures/rel_112_22.rel")
assert not rel.is_difunctional()
assert rel.difunctionality_witness() is not None

frag = eatwb.Fragment.closure(delta=["star"])
assert frag.emit() == open("fixtures/golden/delta_star.eat").read()
assert frag.verify_maltsev()
assert eatwb.Fragment.parse(frag.emit()).emit() == frag.emit()

print("python smoke test: ok")
