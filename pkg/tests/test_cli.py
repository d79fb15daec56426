import numpy as np
import pytest

from elastica_denoise.cli import EXIT_CONFIG, EXIT_DIVERGED, EXIT_IO, EXIT_OK, main
from elastica_denoise.imgio import load_image, load_trace, save_image
from elastica_denoise.synth import NoiseSpec, RingSpec, add_gaussian_noise, make_rings


def run_cli(*args):
    return main([str(a) for a in args])


FAST = ["--tol", "1e-4", "--max-iter", "25", "--b", "0.01"]


class TestSynth:
    def test_writes_both_files_with_declared_size(self, tmp_path):
        clean, noisy = tmp_path / "c.pgm", tmp_path / "n.pgm"
        assert run_cli("synth", "--size", "48", "--seed", "3",
                       "--clean", clean, "--noisy", noisy) == EXIT_OK
        assert load_image(clean).shape == (48, 48)
        assert load_image(noisy).shape == (48, 48)

    def test_deterministic_per_seed(self, tmp_path):
        files = []
        for tag in ("one", "two"):
            clean, noisy = tmp_path / f"c{tag}.pgm", tmp_path / f"n{tag}.pgm"
            run_cli("synth", "--size", "32", "--seed", "42", "--clean", clean, "--noisy", noisy)
            files.append((clean.read_bytes(), noisy.read_bytes()))
        assert files[0] == files[1]

    def test_zero_variance_clean_equals_noisy(self, tmp_path):
        clean, noisy = tmp_path / "c.pgm", tmp_path / "n.pgm"
        run_cli("synth", "--size", "24", "--variance", "0", "--clean", clean, "--noisy", noisy)
        assert clean.read_bytes() == noisy.read_bytes()


class TestMetrics:
    def test_identical_images_print_inf(self, tmp_path, capsys):
        path = tmp_path / "a.pgm"
        save_image(np.full((8, 8), 0.5), path)
        assert run_cli("metrics", path, path) == EXIT_OK
        out = capsys.readouterr().out
        assert "PSNR inf" in out

    def test_twenty_db_pair(self, tmp_path, capsys):
        ref, test = tmp_path / "r.pgm", tmp_path / "t.pgm"
        save_image(np.ones((8, 8)), ref)
        save_image(np.full((8, 8), 0.9), test)
        assert run_cli("metrics", ref, test) == EXIT_OK
        out = capsys.readouterr().out.splitlines()
        assert any(line.startswith("PSNR 20.") for line in out)
        assert any(line.startswith("NRMSE") for line in out)
        assert any(line.startswith("NMAD") for line in out)

    def test_missing_file_is_io_error(self, tmp_path):
        assert run_cli("metrics", tmp_path / "x.pgm", tmp_path / "y.pgm") == EXIT_IO


class TestDenoise:
    def test_zero_iterations_output_equals_input(self, tmp_path):
        inp, out = tmp_path / "in.pgm", tmp_path / "out.pgm"
        save_image(add_gaussian_noise(make_rings(RingSpec.default(24)), NoiseSpec(0.01, 1)), inp)
        code = run_cli("denoise", "--input", inp, "--output", out, "--max-iter", "0")
        assert code == EXIT_OK
        assert out.read_bytes() == inp.read_bytes()

    def test_missing_input_no_output(self, tmp_path):
        out = tmp_path / "out.pgm"
        code = run_cli("denoise", "--input", tmp_path / "missing.pgm", "--output", out)
        assert code == EXIT_IO
        assert not out.exists()

    def test_requires_exactly_one_input_source(self, tmp_path):
        assert run_cli("denoise", "--max-iter", "1") == EXIT_CONFIG
        inp = tmp_path / "in.pgm"
        save_image(np.zeros((8, 8)), inp)
        assert run_cli("denoise", "--input", inp, "--rings", "16") == EXIT_CONFIG

    def test_rings_run_writes_output_trace_and_figure(self, tmp_path, capsys):
        out, trace, fig = tmp_path / "u.png", tmp_path / "t.csv", tmp_path / "f.png"
        code = run_cli("denoise", "--rings", "32", "--add-noise", "--seed", "9",
                       "--output", out, "--trace", trace, "--figure", fig, *FAST)
        assert code == EXIT_OK
        assert out.exists() and fig.exists()
        tr = load_trace(trace)
        assert len(tr) >= 1
        # synthetic runs use the clean rings as reference automatically
        assert not np.isnan(tr.psnr[0])
        summary = capsys.readouterr().out
        assert "psnr=" in summary and "iter=" in summary

    def test_deterministic_byte_identical_outputs(self, tmp_path):
        results = []
        for tag in ("a", "b"):
            out, trace = tmp_path / f"u{tag}.pgm", tmp_path / f"t{tag}.csv"
            code = run_cli("denoise", "--rings", "32", "--add-noise", "--seed", "4",
                           "--output", out, "--trace", trace, *FAST)
            assert code == EXIT_OK
            results.append((out.read_bytes(), trace.read_bytes()))
        assert results[0] == results[1]

    def test_config_file_with_flag_override(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("rings = 24\nadd-noise = yes\nseed = 5\nlambda = 11\n"
                       "b = 0.01\ntol = 1e-3\nmax-iter = 40\n")
        out1 = tmp_path / "a.pgm"
        assert run_cli("denoise", "--config", cfg, "--output", out1) == EXIT_OK
        n1 = int(capsys.readouterr().out.split("iter=")[1].split()[0])
        # flag overrides the config cap
        out2 = tmp_path / "b.pgm"
        assert run_cli("denoise", "--config", cfg, "--output", out2, "--max-iter", "2") == EXIT_OK
        n2 = int(capsys.readouterr().out.split("iter=")[1].split()[0])
        assert n2 == 2 and n1 > 2

    def test_solver_choices(self, tmp_path):
        for solver in ("ralm", "lalmn", "lalm", "rof"):
            code = run_cli("denoise", "--rings", "16", "--add-noise", "--solver", solver,
                           "--max-iter", "3", "--tol", "1e-9", "--b", "0.01")
            assert code == EXIT_OK, solver

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_divergence_exit_code(self, tmp_path):
        trace = tmp_path / "t.csv"
        code = run_cli("denoise", "--rings", "16", "--add-noise", "--a", "1e300",
                       "--b", "0", "--r2", "100", "--delta1", "1e-2", "--lambda", "1",
                       "--max-iter", "500", "--tol", "1e-12", "--trace", trace)
        assert code == EXIT_DIVERGED
        assert trace.exists()  # partial trace persisted

    def test_bad_parameter_is_config_error(self, tmp_path):
        assert run_cli("denoise", "--rings", "16", "--lambda", "-3") == EXIT_CONFIG


class TestCompare:
    def test_single_cell_matches_denoise(self, tmp_path):
        inp = tmp_path / "in.pgm"
        save_image(add_gaussian_noise(make_rings(RingSpec.default(24)), NoiseSpec(0.01, 2)), inp)
        out_dir = tmp_path / "cells"
        code = run_cli("compare", "--input", inp, "--out-dir", out_dir,
                       "--cell", "label=only,solver=ralm", "--no-figures", *FAST)
        assert code == EXIT_OK
        d_out, d_trace = tmp_path / "u.pgm", tmp_path / "t.csv"
        assert run_cli("denoise", "--input", inp, "--output", d_out,
                       "--trace", d_trace, *FAST) == EXIT_OK
        assert (out_dir / "only.pgm").read_bytes() == d_out.read_bytes()
        assert (out_dir / "only.csv").read_bytes() == d_trace.read_bytes()
        assert (out_dir / "summary.csv").exists()

    def test_preset_b0_consistency_report(self, tmp_path, capsys):
        out_dir = tmp_path / "exp"
        code = run_cli("compare", "--rings", "32", "--add-noise", "--seed", "11",
                       "--out-dir", out_dir, "--preset", "b0-consistency",
                       "--tol", "1e-7", "--max-iter", "30")
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "ralm: identical across r1: yes" in out
        assert "lalmn: identical across r1: no" in out
        for solver in ("ralm", "lalmn"):
            for r1 in ("50", "500", "5000"):
                assert (out_dir / f"{solver}-r1-{r1}.csv").exists()
        # figures rendered alongside the delimited outputs by default
        assert (out_dir / "compare_energy.png").exists()
        assert (out_dir / "compare_residual.png").exists()

    def test_zero_iteration_cell_reports_nan_row(self, tmp_path):
        out_dir = tmp_path / "zero"
        code = run_cli("compare", "--rings", "16", "--out-dir", out_dir, "--no-figures",
                       "--cell", "label=frozen,solver=ralm,max_iter=0", "--b", "0.01")
        assert code == EXIT_OK
        summary = (out_dir / "summary.csv").read_text().splitlines()
        assert summary[1].startswith("frozen,ralm,ok,0,nan")

    def test_constant_input_cells_agree_across_solvers(self, tmp_path, capsys):
        inp = tmp_path / "flat.pgm"
        save_image(np.full((16, 16), 0.5), inp)
        out_dir = tmp_path / "flat_cells"
        code = run_cli("compare", "--input", inp, "--out-dir", out_dir, "--no-figures",
                       "--cell", "label=a,solver=ralm", "--cell", "label=b,solver=lalmn",
                       "--max-iter", "4", "--tol", "1e-30", "--b", "0.01")
        assert code == EXIT_OK
        assert (out_dir / "a.pgm").read_bytes() == (out_dir / "b.pgm").read_bytes()

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_divergent_cell_reported_and_exit_nonzero(self, tmp_path, capsys):
        out_dir = tmp_path / "div"
        code = run_cli("compare", "--rings", "16", "--add-noise", "--out-dir", out_dir,
                       "--cell", "label=ok,solver=rof,max_iter=3",
                       "--cell", "label=bad,solver=ralm,a=1e300,r2=100,delta1=1e-2,lambda=1",
                       "--max-iter", "300", "--tol", "1e-12", "--b", "0", "--no-figures")
        assert code == EXIT_DIVERGED
        out = capsys.readouterr().out
        assert "diverged" in out
        assert (out_dir / "ok.csv").exists()
