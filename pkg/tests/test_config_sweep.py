import numpy as np
import pytest

from divbar import ExponentialFamily, TabulatedDensity, parse_config
from divbar.errors import DivbarError, ParseError, ValidationError
from divbar.sweep import SweepSpec, SweepTable, emit_csv, format_cell, run_sweep

CANONICAL_TEXT = """\
# canonical regression fixture
mu = 2
sigma2 = 5
c = 0.05
k = 0.5
beta = 0.8
levy = exp(1)
"""


class TestParseConfig:
    def test_canonical(self):
        parsed = parse_config(CANONICAL_TEXT)
        m = parsed.model
        assert (m.mu, m.sigma2, m.c, m.k, m.beta, m.s) == (2, 5, 0.05, 0.5, 0.8, 0)
        assert isinstance(m.levy, ExponentialFamily) and m.levy.rate == 1.0
        assert parsed.sim.dt == 1e-3
        assert parsed.sim.n_paths == 10_000
        assert parsed.sim.seed == 1
        assert parsed.sim.horizon == pytest.approx(18.0 / 0.05)
        assert parsed.sweep is None

    def test_empty_file(self):
        with pytest.raises(ValidationError, match="mu"):
            parse_config("")

    def test_unknown_key(self):
        with pytest.raises(ParseError) as err:
            parse_config(CANONICAL_TEXT + "mue = 3\n")
        assert err.value.line == 8

    def test_duplicate_key(self):
        with pytest.raises(ParseError, match="duplicate"):
            parse_config(CANONICAL_TEXT + "mu = 3\n")

    def test_not_key_value(self):
        with pytest.raises(ParseError, match="key = value"):
            parse_config("mu\n")

    def test_non_numeric(self):
        with pytest.raises(ParseError, match="not a number"):
            parse_config(CANONICAL_TEXT.replace("mu = 2", "mu = two"))

    def test_k_bound_cited(self):
        with pytest.raises(ValidationError, match="k bound here: 1"):
            parse_config(CANONICAL_TEXT.replace("k = 0.5", "k = 5"))

    def test_bad_levy(self):
        with pytest.raises(ParseError, match="levy must be"):
            parse_config(CANONICAL_TEXT.replace("exp(1)", "gamma(2,3)"))

    def test_table_levy(self, tmp_path):
        z = np.linspace(0.0, 30.0, 20_001)
        table = tmp_path / "density.csv"
        np.savetxt(table, np.column_stack([z, np.exp(-z)]), delimiter=",")
        text = CANONICAL_TEXT.replace("exp(1)", "table(density.csv, 1.0)")
        parsed = parse_config(text, base_dir=str(tmp_path))
        assert isinstance(parsed.model.levy, TabulatedDensity)
        assert parsed.model.levy.tail_rate == 1.0

    def test_missing_table_file(self, tmp_path):
        text = CANONICAL_TEXT.replace("exp(1)", "table(nope.csv, 1.0)")
        with pytest.raises(ParseError, match="cannot read"):
            parse_config(text, base_dir=str(tmp_path))

    def test_sim_overrides(self):
        text = CANONICAL_TEXT + "dt = 0.01\nn_paths = 64\nseed = 9\nhorizon = 400\nantithetic = true\n"
        sim = parse_config(text).sim
        assert (sim.dt, sim.n_paths, sim.seed, sim.horizon) == (0.01, 64, 9, 400)
        assert sim.antithetic

    def test_bad_antithetic(self):
        with pytest.raises(ParseError, match="boolean"):
            parse_config(CANONICAL_TEXT + "antithetic = maybe\n")

    def test_sweep_section(self):
        text = CANONICAL_TEXT + "sweep_param = k\nsweep_range = 0.05:1:20\n"
        sweep = parse_config(text).sweep
        assert sweep.parameter == "k"
        assert (sweep.lo, sweep.hi, sweep.n_points) == (0.05, 1.0, 20)
        assert sweep.outputs == SweepSpec.DEFAULT_OUTPUTS

    def test_sweep_needs_both_keys(self):
        with pytest.raises(ValidationError, match="together"):
            parse_config(CANONICAL_TEXT + "sweep_param = k\n")

    def test_bad_sweep_param(self):
        with pytest.raises(ValidationError, match="sweep_param"):
            parse_config(CANONICAL_TEXT + "sweep_param = q\nsweep_range = 0:1:5\n")


class TestSweepSpec:
    def test_invariants(self, canonical_model):
        with pytest.raises(ValueError):
            SweepSpec("k", lo=1.0, hi=0.5, n_points=5, fixed=canonical_model)
        with pytest.raises(ValueError):
            SweepSpec("k", lo=0.1, hi=0.5, n_points=1, fixed=canonical_model)
        with pytest.raises(ValueError):
            SweepSpec("q", lo=0.1, hi=0.5, n_points=5, fixed=canonical_model)
        with pytest.raises(ValueError):
            SweepSpec(
                "k", lo=0.1, hi=0.5, n_points=5, fixed=canonical_model,
                outputs=("nope",),
            )


class TestRunSweep:
    def test_k_sweep_monotone(self, canonical_model):
        spec = SweepSpec("k", lo=0.05, hi=1.0, n_points=10, fixed=canonical_model)
        table = run_sweep(spec)
        assert table.ok
        xs = table.column("x_star")
        assert len(xs) == 10
        assert all(a < b for a, b in zip(xs, xs[1:]))

    def test_error_rows_recorded(self, canonical_model):
        # k beyond the bound mu/(2*mean_jump)=1 must be flagged, not dropped
        spec = SweepSpec("k", lo=0.5, hi=1.5, n_points=5, fixed=canonical_model)
        table = run_sweep(spec)
        assert not table.ok
        err_idx = table.header.index("error")
        errors = [row[err_idx] for row in table.rows]
        assert sum(e != "" for e in errors) >= 2
        assert len(table.rows) == 5  # nothing silently dropped

    def test_x_slice_with_values(self, canonical_model, canonical_vf):
        spec = SweepSpec(
            "x", lo=1.0, hi=10.0, n_points=4, fixed=canonical_model,
            outputs=("x_star",), x_values=(2.0,),
        )
        table = run_sweep(spec)
        assert table.header == ["x", "x_star", "V_at_2", "error"]
        assert table.column("V_at_2")[0] == pytest.approx(canonical_vf.psi(2.0))

    def test_levy_t_requires_exponential(self, tabulated_unit, canonical_model):
        import dataclasses

        m = dataclasses.replace(canonical_model, levy=tabulated_unit)
        spec = SweepSpec("levy_t", lo=1.0, hi=4.0, n_points=3, fixed=m)
        table = run_sweep(spec)  # per-point errors never abort the sweep
        assert not table.ok
        err_idx = table.header.index("error")
        assert all("exponential" in row[err_idx] for row in table.rows)


class TestCsv:
    def test_format_cell(self):
        assert format_cell("err") == "err"
        assert format_cell(3) == "3"
        assert format_cell(0.1) == "0.10000000000000001"

    def test_three_line_file(self, tmp_path):
        table = SweepTable(header=["a", "b", "error"], rows=[[1.0, 2.0, ""], [3.0, 4.0, ""]])
        out = tmp_path / "t.csv"
        emit_csv(table, out)
        content = out.read_bytes()
        assert content.count(b"\n") == 3
        assert b"\r" not in content

    def test_byte_identical(self, tmp_path, canonical_model):
        spec = SweepSpec("k", lo=0.1, hi=0.9, n_points=5, fixed=canonical_model)
        table = run_sweep(spec)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        emit_csv(table, a)
        emit_csv(table, b)
        assert a.read_bytes() == b.read_bytes()

    def test_round_trip(self, tmp_path, canonical_model):
        spec = SweepSpec("k", lo=0.1, hi=0.9, n_points=5, fixed=canonical_model)
        table = run_sweep(spec)
        out = tmp_path / "t.csv"
        emit_csv(table, out)
        lines = out.read_text().splitlines()
        assert lines[0].split(",") == table.header
        for line, row in zip(lines[1:], table.rows):
            cells = line.split(",")
            for cell, val in zip(cells, row):
                if isinstance(val, str):
                    assert cell == val
                else:
                    # 17 significant digits round-trip float64 exactly
                    assert float(cell) == float(val)

    def test_empty_refused(self, tmp_path):
        with pytest.raises(DivbarError, match="empty"):
            emit_csv(SweepTable(header=["a", "error"]), tmp_path / "x.csv")
