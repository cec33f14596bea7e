"""
Main pipeline orchestrator for feature-network analysis.

Each public method is one workflow behind a CLI subcommand:
- ssrate / boxcurve: SS_rate and box-count curve of one activation dump
- invariance: statistical or geometric invariance across layer dumps
- embed: MDS scatter of a feature network
- boxcover: reference box covering of an edge list
- train / calibrate / gradcheck: penalized training of a small MLP
- synth: synthetic point sets, datasets and graphs
"""

from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from src.boxcover import cover_counts, cover_summary, db_from_counts, read_edge_list, write_edge_list
from src.config import RunConfig, get_config
from src.data import (
    Dataset,
    read_dataset_csv,
    read_matrix_csv,
    read_tensor,
    split_dataset,
    synth_blobs,
    synth_graph,
    synth_points,
    write_dataset_csv,
    write_npy,
)
from src.embed import classical_mds, line_chart_svg, scatter_svg, write_coordinates_csv
from src.featnet import DistanceMatrix, adjacency, distance_matrix, feature_network
from src.fractal import box_curve, data_grid, fractal_dim_fit, ss_rate
from src.fractal.metric import curve_warnings, pf_on_grid
from src.fractal.report import curve_report
from src.invariance import geom_invariance, stat_invariance
from src.trainer import (
    calibrate_gamma,
    compare_constrained,
    init_mlp,
    rng_streams,
    run_gradcheck,
    save_checkpoint,
    train,
)
from src.utils.errors import TrainingDivergedError, ValidationError
from src.utils.file_manager import FileManager
from src.utils.logger import Logger


class AnalysisPipeline:
    """Runs one workflow per subcommand and writes its artifacts."""

    def __init__(self, config: Optional[RunConfig] = None):
        """Initialize the pipeline with configuration."""
        self.config = config or get_config()
        self.output_dir = FileManager.ensure_directory(self.config.output_dir)

    def _out(self, name: str) -> Path:
        return self.output_dir / name

    # --- Metric workflows ---

    def _curve(self, tensor_path, layout: Optional[str]):
        metric = self.config.metric
        Logger.log_step(1, f"Build feature network from {tensor_path}", "STARTED")
        f = feature_network(read_tensor(tensor_path, layout))
        c = distance_matrix(f)
        Logger.log_info(f"Feature network: D={f.d} nodes, B={f.b} features")
        Logger.log_step(2, f"Box-count curve ({metric.mode}, K={metric.grid_count})", "STARTED")
        grid = data_grid(c, metric.grid_count)
        curve = box_curve(c, grid, metric.mode, metric.smoothing())
        result = ss_rate(curve, metric.normalizer_mode)
        for message in curve_warnings(curve):
            Logger.log_warning(message)
        return c, curve, result

    def ssrate(self, tensor_path, layout: Optional[str] = None) -> dict:
        """SS_rate of one activation dump, written to ssrate.json."""
        c, curve, result = self._curve(tensor_path, layout)
        report = curve_report(curve, result, fractal_dim_fit(curve))
        report["input"] = str(tensor_path)
        epsilon = self.config.metric.epsilon
        if epsilon is not None:
            report["epsilon"] = epsilon
            report["edges"] = adjacency(c, epsilon).edge_count
        FileManager.write_json(self._out("ssrate.json"), report)
        Logger.log_step(3, f"SS_rate = {result.value:.6f}", "COMPLETED")
        return report

    def boxcurve(self, tensor_path, layout: Optional[str] = None, plot: bool = False) -> dict:
        """Box-count curve JSON plus an optional SVG chart of log N and pf."""
        _, curve, result = self._curve(tensor_path, layout)
        report = curve_report(curve, result, fractal_dim_fit(curve))
        FileManager.write_json(self._out("boxcurve.json"), report)
        if plot:
            grid = curve.grid
            line_chart_svg(
                grid.lo,
                {"log_n": np.log(curve.n), "pf": pf_on_grid(grid, curve.d)},
                self._out("boxcurve.svg"),
                title=f"SS_rate {result.value:.4f}",
            )
        Logger.log_step(3, "Box-count curve written", "COMPLETED")
        return report

    def invariance(self, kind: str, tensor_paths: Sequence, layout: Optional[str] = None) -> dict:
        """Statistical (stat) or geometric (geom) invariance across layers."""
        if kind not in ("stat", "geom"):
            raise ValidationError(f"Unknown invariance kind '{kind}' (expected stat or geom)")
        Logger.log_step(1, f"Load {len(tensor_paths)} layer dump(s)", "STARTED")
        layers = [feature_network(read_tensor(path, layout)) for path in tensor_paths]
        inv = self.config.invariance
        Logger.log_step(2, f"{kind} invariance", "STARTED")
        if kind == "stat":
            report = stat_invariance(layers, inv.literal_d, self.config.show_progress)
            summary = f"sigma = {report.sigma:.6f}"
        else:
            report = geom_invariance(
                layers, inv.target_dim, inv.method, tuple(inv.fit_percentiles), inv.fit_points,
                self.config.show_progress,
            )
            summary = f"delta = {report.delta:.6f}"
        payload = report.to_dict()
        payload["inputs"] = [str(p) for p in tensor_paths]
        FileManager.write_json(self._out(f"invariance_{kind}.json"), payload)
        Logger.log_step(3, summary, "COMPLETED")
        return payload

    def embed(self, input_path, layout: Optional[str] = None, labels_path=None) -> dict:
        """Classical MDS of a feature network (NPY tensor) or distance matrix (CSV)."""
        input_path = Path(input_path)
        Logger.log_step(1, f"Load {input_path}", "STARTED")
        if input_path.suffix.lower() == ".csv":
            c = DistanceMatrix(read_matrix_csv(input_path))
        else:
            c = distance_matrix(feature_network(read_tensor(input_path, layout)))
        labels = None
        if labels_path is not None:
            labels = read_matrix_csv(labels_path).astype(np.int64).ravel()
        Logger.log_step(2, f"Classical MDS of {c.d} nodes", "STARTED")
        embedding = classical_mds(c, self.config.embed.dim)
        for message in embedding.warnings:
            Logger.log_warning(message)
        scatter_svg(embedding.coords, self._out("embedding.svg"), labels)
        write_coordinates_csv(embedding, self._out("embedding.csv"))
        payload = {"d": embedding.d, "stress": embedding.stress, "warnings": list(embedding.warnings)}
        FileManager.write_json(self._out("embedding.json"), payload)
        Logger.log_step(3, f"stress = {embedding.stress:.3e}", "COMPLETED")
        return payload

    def boxcover(self, edge_list_path, thetas: Sequence[int], n: Optional[int] = None) -> dict:
        """Greedy, burning and (small graphs) exact counts per box size."""
        Logger.log_step(1, f"Read edge list {edge_list_path}", "STARTED")
        graph = read_edge_list(edge_list_path, n)
        Logger.log_info(f"Graph: {graph.n} nodes, {len(graph.edges)} edges")
        Logger.log_step(2, f"Box covering for theta in {list(thetas)}", "STARTED")
        seed = self.config.seed
        rows = [cover_summary(graph, theta, seed) for theta in thetas]
        fits = {}
        positive = [t for t in thetas if t > 0]
        if len(set(positive)) >= 2:
            for algorithm in ("greedy", "burning"):
                fit = db_from_counts(positive, cover_counts(graph, positive, algorithm, seed))
                fits[algorithm] = {"d_B": fit.d_b, "residual": fit.residual}
        payload = {"n": graph.n, "edges": len(graph.edges), "seed": seed, "counts": rows, "fits": fits}
        FileManager.write_json(self._out("boxcover.json"), payload)
        Logger.log_step(3, "Box covering written", "COMPLETED")
        return payload

    # --- Training workflows ---

    def _dataset(self) -> Dataset:
        d = self.config.data
        if d.source == "csv":
            return read_dataset_csv(d.csv_path, d.label_column)
        return synth_blobs(d.classes, d.per_class, d.dim, d.separation, self.config.seed)

    def _prepare(self):
        streams = rng_streams(self.config.seed)
        data = self._dataset()
        train_data, val_data = split_dataset(data, self.config.data.val_fraction, streams.split)
        Logger.log_info(f"Dataset: {len(train_data)} training rows, {len(val_data)} validation rows")
        t = self.config.train
        model = init_mlp(t.widths, t.activation, rng=streams.init)
        return streams, model, train_data, val_data

    def train(self, gamma: Optional[Sequence[float]] = None, compare: bool = False) -> dict:
        """Train (or compare baseline vs penalized training); write log and checkpoint."""
        if compare:
            return self._compare()
        Logger.log_step(1, "Prepare data and model", "STARTED")
        streams, model, train_data, val_data = self._prepare()
        changes = {"gamma_target": tuple(gamma)} if gamma is not None else {}
        cfg = self.config.train_config(**changes)
        Logger.log_step(2, f"Train for {cfg.epochs} epochs (alpha={cfg.alpha})", "STARTED")
        try:
            result = train(model, train_data, cfg, val_data, streams)
        except TrainingDivergedError as e:
            Logger.log_error(f"{e}; saving the last good state")
            if e.model is not None:
                save_checkpoint(e.model, self._out("model.bin"))
            if e.log is not None:
                e.log.to_csv(self._out("train_log.csv"))
            raise
        result.log.to_csv(self._out("train_log.csv"))
        result.log.to_json(self._out("train_log.json"))
        save_checkpoint(result.model, self._out("model.bin"))
        last = result.log.frame.iloc[-1]
        payload = {
            "alpha": cfg.alpha,
            "penalty_fac": cfg.penalty_fac,
            "gamma": list(cfg.gamma_vector(result.model.n_hidden)) if cfg.alpha > 0 else None,
            "train_acc": float(last["train_acc"]),
            "val_acc": None if last["val_acc"] is None or np.isnan(last["val_acc"]) else float(last["val_acc"]),
            "sampled_layers": sorted(result.log.sampled_layers),
            "ss_rate_hard_before": result.profile_before.to_dict(),
            "ss_rate_hard_after": result.profile_after.to_dict(),
        }
        FileManager.write_json(self._out("train_summary.json"), payload)
        Logger.log_step(3, f"train accuracy {payload['train_acc']:.4f}", "COMPLETED")
        return payload

    def _compare(self) -> dict:
        Logger.log_step(1, "Baseline vs penalized comparison", "STARTED")
        streams = rng_streams(self.config.seed)
        train_data, val_data = split_dataset(self._dataset(), self.config.data.val_fraction, streams.split)
        cfg = self.config.train_config()
        t = self.config.train
        report = compare_constrained(t.widths, t.activation, train_data, cfg, t.repeats, val_data)
        payload = report.to_dict()
        FileManager.write_json(self._out("comparison.json"), payload)
        Logger.log_step(2, "Comparison written", "COMPLETED")
        return payload

    def calibrate(self) -> dict:
        """Train without the penalty and write per-layer gamma to gamma.json."""
        Logger.log_step(1, "Prepare data and model", "STARTED")
        streams, model, train_data, _ = self._prepare()
        cfg = self.config.train_config(alpha=0.0)
        Logger.log_step(2, f"Calibration run ({cfg.epochs} epochs)", "STARTED")
        calibration = calibrate_gamma(model, train_data, cfg, streams)
        payload = {
            "gamma": list(calibration.gamma),
            "eval_size": cfg.eval_size,
            "train_acc": float(calibration.result.log.frame.iloc[-1]["train_acc"]),
        }
        FileManager.write_json(self._out("gamma.json"), payload)
        Logger.log_step(3, f"gamma = {[round(g, 4) for g in calibration.gamma]}", "COMPLETED")
        return payload

    def gradcheck(self) -> dict:
        """Finite-difference checks; payload['passed'] tells the outcome."""
        Logger.log_step(1, f"Gradient checks (seed {self.config.seed})", "STARTED")
        report = run_gradcheck(self.config.seed)
        payload = report.to_dict()
        FileManager.write_json(self._out("gradcheck.json"), payload)
        Logger.log_step(2, "Gradient checks", "COMPLETED" if report.passed else "FAILED")
        return payload

    # --- Synthetic data ---

    def synth(self, kind: str, name: str, n: int, **params) -> dict:
        """Write a point set (NPY), blob dataset (CSV) or graph (edge list)."""
        seed = self.config.seed
        Logger.log_step(1, f"Generate {kind} '{name}'", "STARTED")
        if kind == "points":
            points = synth_points(name, n, seed, params.get("dim", 2), params.get("depth", 7))
            path = write_npy(self._out(f"{name}.npy"), points)
        elif kind == "blobs":
            d = self.config.data
            data = synth_blobs(d.classes, d.per_class, d.dim, d.separation, seed)
            path = write_dataset_csv(data, self._out("blobs.csv"))
        elif kind == "graph":
            graph = synth_graph(name, n, seed, params.get("p", 0.2))
            path = write_edge_list(graph, self._out(f"{name}.edgelist"), comment=f"{name} n={n} seed={seed}")
        else:
            raise ValidationError(f"Unknown synth kind '{kind}' (expected points, blobs or graph)")
        Logger.log_step(2, f"Wrote {path}", "COMPLETED")
        return {"kind": kind, "name": name, "path": str(path), "seed": seed}


def read_gamma_file(path) -> List[float]:
    """Per-layer gamma from a calibrate output (gamma.json)."""
    data = FileManager.read_json(path)
    if not isinstance(data, dict) or "gamma" not in data:
        raise ValidationError(f"{path} has no 'gamma' entry")
    return [float(g) for g in data["gamma"]]
