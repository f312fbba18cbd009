import math

import pytest

import pivotsmt


def test_tokenize_and_bleu():
    toks = pivotsmt.tokenize("The cat, sat.", "lowercase")
    assert toks == ["the", "cat", ",", "sat", "."]
    r = pivotsmt.bleu([toks], [toks])
    assert r["bleu"] == pytest.approx(1.0)
    assert pivotsmt.sentence_bleu(toks, toks) == pytest.approx(1.0)


def test_language_model_perplexity():
    lm = pivotsmt.LanguageModel.train([["a", "b"], ["b", "a", "a"]], 2)
    assert lm.order == 2
    assert lm.logprob(["a", "b"]) < 0
    assert lm.perplexity([["a", "b"]]) > 1


def test_alignment_and_extraction():
    probs, ll = pivotsmt.train_ibm1([["a"], ["a", "b"]], [["x"], ["x", "y"]], 20)
    assert probs[("b", "y")] > 0.99
    assert all(b >= a - 1e-9 for a, b in zip(ll, ll[1:]))
    pairs = pivotsmt.extract_phrases(["a", "b"], ["x", "y"], "0-1 1-0")
    assert {(tuple(s), tuple(t)) for s, t, _, _ in pairs} == {
        (("a",), ("y",)),
        (("b",), ("x",)),
        (("a", "b"), ("x", "y")),
    }


def test_triangulation_total_probability():
    sp, pt = pivotsmt.PhraseTable(), pivotsmt.PhraseTable()
    sp.add(["s"], ["p1"], 0.6, 1.0, 0.6, 1.0)
    sp.add(["s"], ["p2"], 0.4, 1.0, 0.4, 1.0)
    pt.add(["p1"], ["t"], 1.0, 0.5, 1.0, 0.5)
    pt.add(["p2"], ["t"], 1.0, 0.5, 1.0, 0.5)
    out = pivotsmt.triangulate(sp, pt)
    assert len(out) == 1
    target, scores = out.options("s")[0]
    assert target == ["t"]
    assert scores["p_t_given_s"] == pytest.approx(1.0)


def test_mbr_and_errors():
    x, y = ["the", "cat", "sat", "down"], ["a", "dog", "ran", "off"]
    assert pivotsmt.mbr_select([x, x, y]) == 0
    with pytest.raises(pivotsmt.PivotSmtError):
        pivotsmt.mbr_select([x, y])


def test_rquantity_inverted():
    value = pivotsmt.rquantity([["a", "b", "c"]], [["x", "y", "z"]], ["0-2 1-1 2-0"])
    assert value == pytest.approx((2 + 3) / 3)


def test_bootstrap_self_comparison():
    refs = [["w%d" % (i % 7), "x", "y", "z"] for i in range(20)]
    v = pivotsmt.bootstrap(refs, refs, refs, samples=200)
    assert v["winner"] == "none"


def test_fixture_is_deterministic():
    a = pivotsmt.make_fixture(50)
    b = pivotsmt.make_fixture(50)
    assert a == b
    assert set(a) == {"src", "piv", "tgt"}
    assert all(4 <= len(s) <= 10 for s in a["src"])


def test_cli_usage_error():
    assert pivotsmt.run(["no-such-command"]) == 2
