"""Command-line interface: exit codes, JSON output, and image emission."""

import json
from fractions import Fraction

import pytest

from mmk import cli
from mmk import feasibility as fb
from mmk.measures import (
    DiscreteMeasure,
    ProductGrid,
    all_index_sets,
    measure_to_json,
    project,
)


def write_problem(path, fam, cost_values=None, refs=None):
    data = {
        "n": fam.n,
        "k": fam.k,
        "axes": list(fam.sizes),
        "marginals": {
            alpha.key(): measure_to_json(fam[alpha])
            for alpha in fam.index_sets()
        },
    }
    if cost_values is not None:
        data["cost"] = {
            "axes": list(fam.sizes),
            "weights": [str(Fraction(v)) for v in cost_values],
        }
    if refs is not None:
        data["refs"] = [measure_to_json(m) for m in refs]
    path.write_text(json.dumps(data))
    return str(path)


def projected_family(seed=0):
    import random

    from mmk.measures import MarginalFamily

    rng = random.Random(seed)
    grid = ProductGrid([2, 2, 2])
    raw = [Fraction(rng.randint(1, 9)) for _ in range(8)]
    total = sum(raw)
    mu = DiscreteMeasure(grid, [w / total for w in raw])
    return MarginalFamily(
        3, 2, [2, 2, 2], {a: project(mu, a) for a in all_index_sets(3, 2)}
    )


class TestCheck:
    def test_feasible_exit_zero(self, tmp_path, capsys):
        path = write_problem(tmp_path / "p.json", projected_family())
        assert cli.main(["check", path]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["feasible"] is True
        assert "witness" in out

    def test_infeasible_exit_two_with_certificate(self, tmp_path, capsys):
        fam = fb.make_modk_counterexample(3, 2)
        path = write_problem(tmp_path / "p.json", fam)
        assert cli.main(["check", path]) == 2
        out = json.loads(capsys.readouterr().out)
        assert out["consistent"] is True
        assert out["feasible"] is False
        assert set(out["certificate"]) == {"1,2", "1,3", "2,3"}

    def test_malformed_exit_one(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert cli.main(["check", str(bad)]) == 1
        assert "cannot read" in capsys.readouterr().err

    def test_missing_keys_exit_one(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"n": 3}))
        assert cli.main(["check", str(bad)]) == 1


class TestSolveAndDual:
    def test_solve_round_trip(self, tmp_path, capsys):
        fam = projected_family(1)
        cost = [Fraction(i % 5) for i in range(8)]
        path = write_problem(tmp_path / "p.json", fam, cost_values=cost)
        assert cli.main(["solve", path]) == 0
        out = json.loads(capsys.readouterr().out)
        assert Fraction(out["gap"]) == 0
        value = Fraction(out["value"])
        pi_weights = [Fraction(w) for w in out["pi"]["weights"]]
        assert sum(w * c for w, c in zip(pi_weights, cost)) == value

    def test_solve_requires_cost(self, tmp_path, capsys):
        path = write_problem(tmp_path / "p.json", projected_family(2))
        assert cli.main(["solve", path]) == 1

    def test_solve_infeasible(self, tmp_path, capsys):
        fam = fb.make_modk_counterexample(3, 2)
        path = write_problem(
            tmp_path / "p.json", fam, cost_values=[0] * fam.full_grid().ncells
        )
        assert cli.main(["solve", path]) == 2

    def test_dual_output(self, tmp_path, capsys):
        fam = projected_family(3)
        cost = [Fraction(i % 3) for i in range(8)]
        path = write_problem(tmp_path / "p.json", fam, cost_values=cost)
        assert cli.main(["dual", path]) == 0
        out = json.loads(capsys.readouterr().out)
        assert set(out["potentials"]) == {"1,2", "1,3", "2,3"}

    def test_float_mode_flag(self, tmp_path, capsys):
        fam = projected_family(4)
        cost = [Fraction(i) for i in range(8)]
        path = write_problem(tmp_path / "p.json", fam, cost_values=cost)
        assert cli.main(["--arithmetic", "float", "solve", path]) == 0
        out = json.loads(capsys.readouterr().out)
        assert abs(float(Fraction(out["gap"]))) < 1e-7


class TestSignedAndBounded:
    def test_signed_uniting(self, tmp_path, capsys):
        fam = projected_family(5)
        path = write_problem(tmp_path / "p.json", fam)
        assert cli.main(["signed", path]) == 0
        out = json.loads(capsys.readouterr().out)
        mu = DiscreteMeasure(
            ProductGrid(out["signed_uniting"]["axes"]),
            [Fraction(w) for w in out["signed_uniting"]["weights"]],
        )
        for alpha in fam.index_sets():
            assert project(mu, alpha) == fam[alpha]

    def test_bounded_dual_on_product_instance(self, tmp_path, capsys):
        import random

        from mmk.measures import MarginalFamily, product, uniform

        rng = random.Random(6)
        mus = []
        for i in (1, 2, 3):
            raw = [Fraction(rng.randint(1, 4)) for _ in range(2)]
            t = sum(raw)
            mus.append(
                DiscreteMeasure(ProductGrid([2], axes=[i]), [w / t for w in raw])
            )
        full = product(mus)
        fam = MarginalFamily(
            3,
            2,
            [2, 2, 2],
            {a: project(full, a) for a in all_index_sets(3, 2)},
        )
        cost = [Fraction(rng.randint(0, 5)) for _ in range(8)]
        path = write_problem(tmp_path / "p.json", fam, cost_values=cost)
        assert cli.main(["bounded-dual", path]) == 0
        out = json.loads(capsys.readouterr().out)
        norm = max(cost)
        for values in out["potentials"].values():
            for v in values:
                assert (
                    Fraction(-80, 3) * norm
                    <= Fraction(v)
                    <= Fraction(40, 3) * norm
                )


class TestXor:
    def test_ops(self, capsys):
        assert cli.main(["xor", "xor", "5/8", "3/8"]) == 0
        assert capsys.readouterr().out.strip() == "3/4"
        assert cli.main(["xor", "integral", "1", "1"]) == 0
        assert capsys.readouterr().out.strip() == "1/2"
        assert cli.main(["xor", "f", "1", "1"]) == 0
        assert capsys.readouterr().out.strip() == "1/4"

    def test_slice_writes_p2(self, tmp_path, capsys, monkeypatch):
        out = tmp_path / "slice.pgm"
        assert (
            cli.main(
                ["xor", "slice", "--z", "0", "--depth", "3", "--out", str(out)]
            )
            == 0
        )
        text = out.read_text()
        assert text.startswith("P2\n8 8\n1\n")
        capsys.readouterr()

    def test_non_dyadic_rejected(self, capsys):
        assert cli.main(["xor", "f", "1/3", "1/2"]) == 1
        assert "invalid input" in capsys.readouterr().err


class TestCases:
    def test_unknown_case_exit_one(self, capsys):
        assert cli.main(["case", "no-such-case"]) == 1
        assert "unknown case" in capsys.readouterr().err

    def test_plane_duals(self, capsys):
        assert cli.main(["case", "plane-duals"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert Fraction(out["kappa"]) == Fraction(1, 6)
        for check in out["checks"]:
            assert Fraction(check["plane_value"]) == Fraction(check["xyz"])

    def test_nonuniform222(self, capsys):
        assert cli.main(["case", "nonuniform222"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["unique"] is True
        assert Fraction(out["witness"]["0,0,0"]) == 0
        assert Fraction(out["witness"]["0,1,0"]) == Fraction(1, 6)

    def test_nonstrong_small(self, capsys):
        assert cli.main(["case", "nonstrong", "--N", "6"]) == 0
        out = json.loads(capsys.readouterr().out)
        diag = [Fraction(v) for v in out["F_diagonal"]]
        # The diagonal recurrence: consecutive differences are exactly 3.
        diffs = {b - a for a, b in zip(diag[:-1], diag[1:])}
        assert diffs == {3}

    def test_discontinuous_small(self, capsys):
        assert cli.main(["case", "discontinuous", "--N", "6"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert Fraction(out["dual_value"]) == Fraction(1, 6)
        assert out["slack_cells"] < out["total_cells"]

    def test_uniformband_emits_images(self, tmp_path, capsys):
        assert (
            cli.main(
                ["case", "uniformband", "--N", "6", "--out", str(tmp_path)]
            )
            == 0
        )
        out = json.loads(capsys.readouterr().out)
        assert len(out["slices"]) == 3
        for path in out["slices"]:
            with open(path) as fh:
                assert fh.read(2) == "P2"

    def test_unreachable_small_with_jobs(self, capsys):
        assert cli.main(["--jobs", "3", "case", "unreachable", "--N", "6"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["weighted_growth"] > 0
        for entry in out["gamma_bounds"]:
            for v in entry["lp_min"]:
                assert v >= entry["lower_bound"] - 1e-8


class TestFigure:
    def test_sierpinski(self, tmp_path, capsys):
        out = tmp_path / "s.pgm"
        assert (
            cli.main(
                ["figure", "sierpinski", "--depth", "4", "--out", str(out)]
            )
            == 0
        )
        header = out.read_text().splitlines()[:3]
        assert header == ["P2", "16 16", "1"]
        capsys.readouterr()

    def test_unknown_figure(self, capsys):
        assert cli.main(["figure", "nope"]) == 1
