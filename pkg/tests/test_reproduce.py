"""
Tests for the reproduction recipes at reduced depth.
"""

import pytest

from renyi_dimensions.reproduce import RECIPE_ALIASES, RECIPES, RecipeResult, run_recipe


def failed(result: RecipeResult):
    return [(c.name, c.measured, c.target) for c in result.criteria if not c.passed]


class TestRecipes:
    """Each recipe should pass at a reduced but meaningful depth."""

    def test_sparse_subsequence(self):
        result = run_recipe("sparse-subsequence", depth=2 ** 12)
        assert result.passed, failed(result)
        rows = result.tables["subsequences"]
        eps_rows = [r for r in rows if r[0] == "eps"]
        eta_rows = [r for r in rows if r[0] == "eta"]
        assert all(r[2] == pytest.approx(0.5) for r in eps_rows)
        assert all(r[2] == pytest.approx(1 / 3) for r in eta_rows)

    def test_bestfit_gap(self):
        result = run_recipe("bestfit-gap", depth=48 ** 3)
        assert result.passed, failed(result)
        names = [c.name for c in result.criteria]
        assert "running average at n=12" in names
        assert "max/median of n |m_x - m~_n|" in names
        assert result.headers["checkpoints"] == ["n", "running_average", "exact"]

    def test_gaussian_ratio(self):
        result = run_recipe("gaussian-ratio", depth=8)
        assert result.passed, failed(result)
        assert len(result.criteria) == 9

    def test_matuszewska(self):
        result = run_recipe("matuszewska", depth=48 ** 3)
        assert result.passed, failed(result)
        report = dict(result.tables["report"])
        assert report["setting.tail_fraction"] == 0.8
        assert report["D_mm"] <= 0.06

    def test_convolution(self):
        result = run_recipe("convolution")
        assert result.passed, failed(result)
        cases = {row[0]: row for row in result.tables["convolution"]}
        assert cases["point*uniform"][1] == pytest.approx(1.0, abs=1e-9)

    def test_unknown_recipe(self):
        with pytest.raises(KeyError):
            run_recipe("no-such-recipe")

    def test_registry(self):
        assert set(RECIPES) == {"sparse-subsequence", "bestfit-gap", "gaussian-ratio",
                                "matuszewska", "convolution"}

    def test_short_names(self):
        assert RECIPE_ALIASES == {"thm5.2": "sparse-subsequence", "sec8": "bestfit-gap",
                                  "lemma2.3": "gaussian-ratio", "sec9": "matuszewska"}
        assert set(RECIPE_ALIASES.values()) <= set(RECIPES)

    def test_short_name_runs_the_same_recipe(self):
        result = run_recipe("thm5.2", depth=2 ** 12)
        assert result.name == "sparse-subsequence"
        assert result.passed, failed(result)
