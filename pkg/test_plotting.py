from feastap.codec import encode
from feastap.evolution import GenerationRecord
from feastap.neuron import WaveformParams
from feastap.plotting import plot_history, plot_psp, plot_raster

PNG_MAGIC = b"\x89PNG"


def test_history_figure(tmp_path):
    history = [GenerationRecord(g, 30.0 + g, 25.0 + g, 0.3 + 0.1 * g, 4) for g in range(5)]
    path = plot_history(history, tmp_path / "history.png")
    assert path.read_bytes()[:4] == PNG_MAGIC


def test_raster_figure(tmp_path, iris, short_encoding):
    trains = encode(iris.features[0], [1, 1, 0, 1], short_encoding)
    path = plot_raster(trains, tmp_path / "raster.png", horizon=short_encoding.horizon)
    assert path.read_bytes()[:4] == PNG_MAGIC


def test_psp_figure(tmp_path):
    path = plot_psp({"fast": WaveformParams(1.0, 1.0), "slow": WaveformParams(5.0, 15.0)}, tmp_path / "psp.png")
    assert path.is_file()


def test_run_with_plots(tiny_config, small_iris, tmp_path):
    from feastap.runner import run_repeat

    summary = run_repeat(tiny_config.with_overrides(generations=0, plots=True), small_iris, 0, tmp_path)
    for name in ("history.png", "raster.png", "psp.png"):
        assert (tmp_path / summary.run_dir / name).is_file()
