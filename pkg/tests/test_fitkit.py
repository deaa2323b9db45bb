import numpy as np
import pytest

from pagingroe import fitkit
from pagingroe.dist import multicore_power_law, power_law, sample_sequence, uniform


@pytest.fixture
def trace_file(tmp_path):
    def make(text, name="t.txt"):
        path = tmp_path / name
        path.write_bytes(text.encode() if isinstance(text, str) else text)
        return path
    return make


def test_ingest_counts(trace_file):
    tr = fitkit.ingest_trace(trace_file("a\na\nb"))
    assert tr.ranked_counts.tolist() == [2, 1]
    assert (tr.m, tr.total) == (2, 3)
    assert tr.ranked_pages == ["a", "b"]


def test_ingest_skips_comments_and_blanks(trace_file):
    assert fitkit.ingest_trace(trace_file("#c\nx")).ranked_counts.tolist() == [1]
    assert fitkit.ingest_trace(trace_file("x\n\n  \ny\nx\n")).ranked_counts.tolist() == [2, 1]


def test_ingest_ties_keep_first_appearance(trace_file):
    assert fitkit.ingest_trace(trace_file("b\na\nc\na\nb\n")).ranked_pages == ["b", "a", "c"]


def test_ingest_errors(trace_file):
    with pytest.raises(ValueError, match=":2:"):
        fitkit.ingest_trace(trace_file("a\nb c\n"))
    with pytest.raises(ValueError, match="UTF-8"):
        fitkit.ingest_trace(trace_file(b"a\n\xff\xfe\n"))
    with pytest.raises(ValueError):
        fitkit.ingest_trace(trace_file("# only a comment\n"))


def test_ingest_generated_trace(tmp_path):
    pages = sample_sequence(power_law(1, 100), 10**6, 0).pages
    path = tmp_path / "big.txt"
    path.write_text("\n".join(map(str, pages.tolist())))
    tr = fitkit.ingest_trace(path)
    assert tr.m <= 100 and tr.total == 10**6


def test_summarize_matches_ingest(trace_file):
    seq = [3, 1, 3, 2, 2, 3]
    tr = fitkit.summarize(seq)
    assert tr.ranked_pages == [3, 2, 1]
    assert tr.ranked_counts.tolist() == [3, 2, 1]
    assert fitkit.summarize(["x", "y", "x"]).ranked_pages == ["x", "y"]


def test_ks_statistic():
    assert fitkit.ks_statistic([0.5, 1.0], [0.5, 1.0]) == 0
    assert fitkit.ks_statistic([0.5, 1.0], [0.25, 1.0]) == pytest.approx(0.25)
    assert fitkit.ks_statistic([1.0], [1.0]) == 0
    with pytest.raises(ValueError):
        fitkit.ks_statistic([0.5, 1.0], [1.0])
    with pytest.raises(ValueError):
        fitkit.ks_statistic([0.6, 0.5, 1.0], [0.2, 0.4, 1.0])
    with pytest.raises(ValueError):
        fitkit.ks_statistic([0.5, 0.9], [0.5, 1.0])


def _trace(dist, n=10**6, seed=0):
    return fitkit.summarize(sample_sequence(dist, n, seed).pages)


def test_fit_power_law_round_trip():
    fit = fitkit.fit_power_law(_trace(power_law(0.8, 10**4)))
    assert 0.75 <= fit.alpha <= 0.85
    assert fit.ks <= 0.02
    assert fit.kappa == 1.0


def test_fit_uniform_gives_small_alpha():
    fit = fitkit.fit_power_law(_trace(uniform(100), n=10**5))
    assert fit.alpha < 0.05
    assert fit.ks < 0.01


def test_fit_two_page_case():
    tr = fitkit.summarize(["a", "a", "b"])
    fit = fitkit.fit_power_law(tr)
    assert fit.alpha == pytest.approx(1.0, abs=0.01)
    assert fit.ks < 1e-3
    assert fitkit.fit_multicore(tr).ks < 1e-3


def test_fit_multicore_round_trip():
    tr = _trace(multicore_power_law(1.2, 10**4, 400))
    fit = fitkit.fit_multicore(tr)
    assert 1.1 <= fit.alpha <= 1.3
    assert fit.ks <= 0.05
    assert fit.ks <= fitkit.fit_power_law(tr).ks + 1e-6


def test_fit_multicore_nests_power_law():
    tr = _trace(power_law(0.7, 1000), n=10**5)
    assert fitkit.fit_multicore(tr).ks <= fitkit.fit_power_law(tr).ks + 1e-6


def test_fit_needs_two_pages():
    with pytest.raises(ValueError):
        fitkit.fit_power_law(fitkit.summarize([1, 1, 1]))


def test_fit_is_scale_free():
    # duplicating every request leaves the ranked curve, and so the fit, unchanged
    pages = sample_sequence(power_law(1.1, 500), 10**5, 3).pages
    a = fitkit.fit_multicore(fitkit.summarize(pages))
    b = fitkit.fit_multicore(fitkit.summarize(np.repeat(pages, 3)))
    assert (a.alpha, a.kappa) == pytest.approx((b.alpha, b.kappa))


def test_curves_round_trip(tmp_path):
    fit = fitkit.fit_power_law(fitkit.summarize(["a", "a", "b"]))
    data, model = fitkit.export_cdf_curves(fit, tmp_path / "fig")
    assert len(open(data).read().splitlines()) == 2
    assert len(open(model).read().splitlines()) == 2
    np.testing.assert_array_equal(fitkit.read_curve(data), fit.empirical_cdf)
    np.testing.assert_array_equal(fitkit.read_curve(model), fit.model_cdf)


def test_fit_record():
    fit = fitkit.fit_power_law(fitkit.summarize(["a", "a", "b"]))
    rec = fit.record()
    assert rec["model"] == "power_law" and rec["m"] == 2 and rec["total"] == 3
    assert '"model": "power_law"' in fit.to_json()
