import math

from elastica_denoise.model import IterationTrace
from elastica_denoise.report import save_comparison_figures, save_trace_figure


def demo_trace(psnr=True):
    tr = IterationTrace()
    for k in range(1, 30):
        tr.append(k, 100.0 / k, 20.0 + k * 0.2 if psnr else math.nan, 10.0 ** (-k / 8.0), 0.5 / k)
    return tr


def test_trace_figure_written(tmp_path):
    path = tmp_path / "trace.png"
    out = save_trace_figure(demo_trace(), path, title="demo")
    assert out == str(path)
    assert path.stat().st_size > 1000
    assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_trace_figure_without_reference(tmp_path):
    path = tmp_path / "noref.png"
    save_trace_figure(demo_trace(psnr=False), path)
    assert path.stat().st_size > 1000


def test_comparison_figures(tmp_path):
    labeled = {"a": demo_trace(), "b": demo_trace()}
    written = save_comparison_figures(labeled, tmp_path)
    assert set(written) == {"energy", "psnr", "residual", "norm_n"}
    for path in written.values():
        assert (tmp_path / path).exists() or path.startswith(str(tmp_path))


def test_comparison_figures_skip_psnr_when_absent(tmp_path):
    labeled = {"a": demo_trace(psnr=False)}
    written = save_comparison_figures(labeled, tmp_path)
    assert "psnr" not in written
    assert set(written) == {"energy", "residual", "norm_n"}
