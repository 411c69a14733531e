"""Acceptance criteria AC1-AC9; each test prints one PASS/FAIL line in the summary."""

import json
import math
import time

import numpy as np
import pytest

from cpdpgan import classifier, cli, dataset, gan, metrics, nn, normrules, pipeline
from cpdpgan.classifier import NbModel
from cpdpgan.dataset import Label
from cpdpgan.gan import GanConfig, LossVariant
from cpdpgan.metrics import ConfusionMatrix
from cpdpgan.normrules import DistStats, NormalizationChoice
from cpdpgan.pipeline import PipelineConfig

ACTS = list(nn.Activation)


def rel_err(a, b):
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))


def jittered(mlp, rng):
    return mlp.with_params([p + 0.1 * rng.normal(size=p.shape) for p in mlp.params()])


def test_ac1_gradient_correctness():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    for _ in range(20):
        n_layers = int(rng.integers(1, 4))
        dims = [int(d) for d in rng.integers(1, 5, size=n_layers + 1)]
        acts = [ACTS[int(k)] for k in rng.integers(0, len(ACTS), size=n_layers)]
        mlp = jittered(nn.init(dims, acts, seed=int(rng.integers(1 << 30))), rng)
        x, u = rng.normal(size=(5, dims[0])), rng.normal(size=(5, dims[-1]))
        analytic, _ = nn.backward(mlp, nn.forward(mlp, x), u)
        fd = nn.finite_diff_grad(mlp, lambda net: float(np.sum(u * net(x))), eps=1e-5)
        for a, f in zip(analytic.as_list(), fd.as_list()):
            assert rel_err(a, f) < 1e-4

    for seed in range(4):
        f = seed + 1
        base = gan.build(f, (5, 4), seed=seed)
        model = gan.GanModel(jittered(base.generator, rng), jittered(base.discriminator, rng))
        real, z = rng.normal(size=(6, f)), rng.normal(size=(6, f))
        _, d_grads, g_via_d = gan.d_loss_gradients(model, real, z, wrt_generator=True)
        fd_d = nn.finite_diff_grad(
            model.discriminator, lambda d: gan.d_loss(d(real), d(model.generator(z))), eps=1e-5)
        fd_gd = nn.finite_diff_grad(
            model.generator,
            lambda g: gan.d_loss(model.discriminator(real), model.discriminator(g(z))), eps=1e-5)
        for variant in LossVariant:
            _, g_grads, _ = gan.g_loss_gradients(model, z, variant)
            fd_g = nn.finite_diff_grad(
                model.generator, lambda g: gan.g_loss(model.discriminator(g(z)), variant), eps=1e-5)
            for a, b in zip(g_grads.as_list(), fd_g.as_list()):
                assert rel_err(a, b) < 1e-4
        for a, b in zip(d_grads.as_list() + g_via_d.as_list(), fd_d.as_list() + fd_gd.as_list()):
            assert rel_err(a, b) < 1e-4
    assert time.perf_counter() - start < 10.0


def test_ac2_equilibrium_value():
    # a discriminator with all-zero output weights says 0.5 to everything
    model = gan.build(3, (4,), seed=0)
    d = model.discriminator
    last = d.layers[-1]
    flat = nn.DenseLayer(np.zeros_like(last.weights), np.zeros_like(last.bias), last.activation)
    model = gan.GanModel(model.generator, nn.Mlp([*d.layers[:-1], flat]))
    rng = np.random.default_rng(0)
    real, z = rng.normal(size=(16, 3)), rng.normal(5.0, 1.0, size=(16, 3))
    v = gan.value(model.discriminator(real), model.discriminator(model.generator(z)))
    assert abs(v - (-2 * math.log(2))) < 1e-6
    assert abs(v - (-1.386294)) < 1e-6


def test_ac3_adaptation_at_desk_scale(shifted_pair):
    start = time.perf_counter()
    source, target = shifted_pair
    cfg = PipelineConfig(gan=GanConfig(epochs=200, seed=0))
    adapted = pipeline.run_pipeline(source, target, cfg)
    baseline = pipeline.run_pipeline(source, target, cfg.with_gan(epochs=0))
    print(f"\nmmd {adapted.mmd_before:.4f} -> {adapted.mmd_after:.4f}; "
          f"f1 baseline {baseline.f1:.4f} adapted {adapted.f1:.4f}")
    assert adapted.mmd_after <= 0.5 * adapted.mmd_before
    assert adapted.f1 - baseline.f1 >= 0.15
    assert time.perf_counter() - start < 60.0


def direct_bayes(prior, mean, var, x):
    joint = [prior[c] * math.prod(
        math.exp(-(x[f] - mean[c][f]) ** 2 / (2 * var[c][f])) / math.sqrt(2 * math.pi * var[c][f])
        for f in range(len(x))) for c in range(2)]
    return joint[0] / sum(joint), joint[1] / sum(joint)


def test_ac4_naive_bayes_oracle():
    rng = np.random.default_rng(7)
    for _ in range(50):
        f = int(rng.integers(1, 4))
        prior = rng.dirichlet([1.0, 1.0])
        mean, var = rng.normal(size=(2, f)), rng.uniform(0.2, 3.0, size=(2, f))
        x = rng.normal(size=f)
        got = classifier.predict_proba(NbModel(np.log(prior), mean, var), x)
        want = direct_bayes(prior.tolist(), mean.tolist(), var.tolist(), x.tolist())
        assert abs(got[0] - want[0]) < 1e-9 and abs(got[1] - want[1]) < 1e-9

    hand = dataset.ProjectDataset("hand", ["m0"], [[1.0], [3.0], [-1.0], [-3.0]],
                                  labels=[Label.FAULTY, Label.FAULTY, Label.CLEAN, Label.CLEAN])
    m = classifier.fit(hand)
    assert m.mean.tolist() == [[2.0], [-2.0]]
    assert m.var.tolist() == [[1.0], [1.0]]
    assert np.exp(m.log_prior).tolist() == [0.5, 0.5]


def test_ac5_metric_correctness():
    F, C = Label.FAULTY, Label.CLEAN
    cm = metrics.confusion([F, F, F, C], [F, F, C, F])
    assert (cm.tp, cm.fp, cm.fn) == (2, 1, 1)
    for v in metrics.f_measure(cm):
        assert abs(v - 2 / 3) < 1e-12
    assert metrics.f_measure(ConfusionMatrix(0, 0, 5, 0)) == (0.0, 0.0, 0.0)
    assert metrics.f_measure(ConfusionMatrix(0, 4, 1, 0)) == (0.0, 0.0, 0.0)
    assert metrics.f_measure(ConfusionMatrix(0, 0, 1, 4)) == (0.0, 0.0, 0.0)
    assert metrics.f_measure(ConfusionMatrix(0, 2, 1, 3)) == (0.0, 0.0, 0.0)


def dist(mean=1.0, median=1.0, lo=1.0, hi=1.0, std=1.0, n=100):
    return DistStats(mean=mean, median=median, min=lo, max=hi, std=std, n_instances=n)


@pytest.mark.parametrize("source,target,rule,choice", [
    (dist(), dist(), 1, NormalizationChoice.NO_NORM),
    (dist(), dist(mean=3.0, lo=10.0, hi=10.0, std=3.0, n=1000), 2, NormalizationChoice.MIN_MAX),
    (dist(n=200), dist(std=3.0, n=100), 3, NormalizationChoice.ZSCORE_SOURCE_STATS),
    (dist(n=100), dist(std=0.2, n=200), 3, NormalizationChoice.ZSCORE_SOURCE_STATS),
    (dist(n=100), dist(std=3.0, n=200), 4, NormalizationChoice.ZSCORE_TARGET_STATS),
    (dist(n=200), dist(std=0.2, n=100), 4, NormalizationChoice.ZSCORE_TARGET_STATS),
    (dist(), dist(mean=1.5, std=1.5, n=120), 5, NormalizationChoice.ZSCORE),
], ids=["rule1", "rule2", "rule3-wider", "rule3-narrower", "rule4-wider", "rule4-narrower", "rule5"])
def test_ac6_rule_engine(source, target, rule, choice):
    levels = normrules.compare(source, target)
    assert normrules.select_rule(levels, source.n_instances, target.n_instances) == (rule, choice)
    s = normrules.pairwise_dist(dataset.ProjectDataset("p", ["m0"], [[0.0], [3.0], [4.0]]))
    assert (s.mean, s.median, s.min, s.max) == (8 / 3, 3.0, 1.0, 4.0)
    assert s.std == math.sqrt(14 / 9)


@pytest.mark.parametrize("n,faulty,rate", [(324, 129, 39.81), (997, 206, 20.66), (691, 64, 9.26)],
                         ids=["324-129", "997-206", "691-64"])
def test_ac7_buggy_rate_table(capsys, labeled_file, n, faulty, rate):
    assert cli.main(["stats", labeled_file(n, faulty)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out == {"n": n, "faulty": faulty, "buggy_rate": rate}
    assert f"{out['buggy_rate']:.2f}" == f"{rate:.2f}"


@pytest.fixture
def run_dir(tmp_path, shifted_pair):
    for ds in shifted_pair:
        dataset.save_csv(ds, str(tmp_path / f"{ds.name}.csv"))
    (tmp_path / "run.json").write_text(json.dumps(
        {"source": "source.csv", "target": "target.csv", "seed": 0}))
    return tmp_path


def test_ac8_epoch_sweep_protocol(capsys, run_dir):
    start = time.perf_counter()
    blobs = []
    for k in range(2):
        out = run_dir / f"sweep{k}"
        code = cli.main(["sweep", str(run_dir / "run.json"), "--epochs", "25,50,75,100",
                         "--output-dir", str(out)])
        assert code == 0, capsys.readouterr().err
        blobs.append((out / "sweep.csv").read_bytes())
        reports = json.loads((out / "sweep.json").read_text())
        assert [r["epochs"] for r in reports] == [25, 50, 75, 100]
        assert all(0.0 <= r["f1"] <= 1.0 for r in reports)
    assert blobs[0] == blobs[1]
    assert len(blobs[0].decode().splitlines()) == 5
    assert time.perf_counter() - start < 180.0


def test_ac9_determinism_everywhere(capsys, run_dir, shifted_pair):
    def snapshot(path):
        return {p.name: p.read_bytes() for p in sorted(path.iterdir())}

    cfg = str(run_dir / "run.json")
    for k in range(2):
        assert cli.main(["train", cfg, "--epochs", "20", "--output-dir", str(run_dir / f"t{k}")]) == 0
        assert cli.main(["sweep", cfg, "--epochs", "5,10", "--workers", "2",
                         "--output-dir", str(run_dir / f"s{k}")]) == 0
    assert snapshot(run_dir / "t0") == snapshot(run_dir / "t1")
    assert snapshot(run_dir / "s0") == snapshot(run_dir / "s1")
    assert len(snapshot(run_dir / "t0")) == 4

    pc = PipelineConfig(gan=GanConfig(epochs=10, seed=3))
    a = pipeline.fit_pipeline(*shifted_pair, pc)
    b = pipeline.fit_pipeline(*shifted_pair, pc)
    assert a.report.to_json() == b.report.to_json()
    assert json.dumps(a.model.to_dict()) == json.dumps(b.model.to_dict())
    assert a.trace.records == b.trace.records
