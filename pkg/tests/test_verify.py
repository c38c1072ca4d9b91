"""Self-check suite: invariants pass on defaults, fault injection is caught."""

from torusflow import verify


class TestRunAll:
    def test_default_seeds_all_pass(self):
        results = verify.run_all(seed=0, samples=50)
        assert results
        assert all(r.passed for r in results), [r.name for r in results if not r.passed]

    def test_lp_rows_present_for_both_p(self):
        results = verify.run_all(seed=0, samples=20, p_list=(2.0, 4.0))
        names = [r.name for r in results]
        assert "lp_conservation_p2" in names
        assert "lp_conservation_p4" in names

    def test_corrupted_poisson_fails_symmetry(self):
        results = verify.run_all(seed=0, samples=20, corrupt_poisson=True)
        by_name = {r.name: r for r in results}
        assert not by_name["k_symmetry"].passed
        assert not all(r.passed for r in results)

    def test_results_carry_metrics(self):
        for r in verify.run_all(seed=1, samples=20):
            assert r.detail
            assert r.name
