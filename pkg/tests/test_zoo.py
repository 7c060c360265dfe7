"""Experiment builders: published constants, validity, structural claims."""

import numpy as np
import pytest

from nsat import ConfigError, Fabric
from nsat.fxp import OFF
from nsat.zoo import mnn, fields, erbm, erbp, pattern, report
from nsat.zoo.datasets import make_surrogate, load_digit_files, DatasetError


def test_every_builder_output_validates():
    for behavior in mnn.BEHAVIORS:
        mnn.build_mnn(behavior).validate()
    for variant in fields.VARIANTS:
        cfg, _ = fields.build_field(variant)
        cfg.validate()
        cfg4, _ = fields.build_field(variant, cores=4)
        cfg4.validate()
    erbm.build_erbm()[0].validate()
    erbp.build_erbp()[0].validate()
    pattern.build_pattern().validate()


def test_mnn_published_constants():
    cfg = mnn.build_mnn("tonic")
    g = cfg.cores[0].groups[0]
    assert [g.A[i][i] for i in range(4)] == [-4, -7, -2, -6]
    assert g.b == [-287, -39, 0, 0]
    assert g.Xinit == [-7000, -5000, 100, 10]
    assert g.Xreset == [-7000, -5000, 0, 0]
    assert g.adaptive_theta

    burst = mnn.build_mnn("burst").cores[0].groups[0]
    assert burst.Xreset[2] == 1000
    assert burst.XresetOn == [True, False, True, False]

    phasic = mnn.build_mnn("phasic").cores[0].groups[0]
    assert phasic.XresetOn == [True, False, True, False]
    assert phasic.b[:2] == [-250, -10]


def test_mnn_unknown_behavior():
    with pytest.raises(ValueError, match="unknown behavior"):
        mnn.build_mnn("wobble")


def test_field_group_constants():
    cfg, _ = fields.build_field("bump")
    g = cfg.cores[0].groups[0]
    assert g.A[0][0] == -2 and g.sA[0][0] == -1
    assert g.b[0] == -5
    assert not g.reset_enabled


def test_field_kernel_quantization_bound():
    for variant, v in fields.VARIANTS.items():
        q, step = fields.quantized_kernel(v["K_e"], v["shift"])
        assert np.abs(q).max() <= 127
        for i in range(0, 100, 7):
            for j in range(100):
                w = fields.dog_weight(i - j, v["K_e"], v["shift"])
                assert abs(q[i, j] * step - w) <= step / 2 + 1e-12


def test_field_input_events_match_plan():
    _, ev = fields.build_field("bump", cores=1)
    ticks = np.array([e[0] for e in ev])
    assert ticks.max() < 400          # drive stops at tick 400
    _, ev = fields.build_field("select")
    ids = {e[2] - 100 for e in ev}
    assert ids <= (set(range(20, 40)) | set(range(70, 90)))


def test_erbm_rejects_short_refractory():
    with pytest.raises(ConfigError, match="refractory"):
        erbm.build_erbm(erbm.ErbmParams(refractory=36))


def test_erbm_shared_weights_symmetric_after_learning():
    run = erbm.ErbmRun()
    assert run.symmetry_exact()
    for pix, orient in run.patterns[:4]:
        run.present(pix, orient)
    assert run.symmetry_exact()


def test_erbm_kernel_constants():
    _, lg_hid = erbm._lgroups(erbm.ErbmParams())
    assert lg_hid.tca == [16, 36] and lg_hid.tac == [-16, -36]
    assert lg_hid.hica == [1, 0, -1] and lg_hid.siac == [-1, -1, -1]


def test_bars_and_stripes_set():
    pats = erbm.bars_and_stripes()
    assert len(pats) == 32
    uniq = {tuple(p) for p, _ in pats}
    assert len(uniq) == 30            # all-off and all-on shared across labels


def test_erbp_published_constants():
    cfg, ids = erbp.build_erbp()
    gh, go, ge = cfg.cores[0].groups
    assert gh.prob == [9, 15] and go.prob == [9, 15] and ge.prob == [15, 15]
    assert gh.Wgain == [3, 4] and ge.Wgain == [4, 4]
    assert ge.XspikeIncrVal[0] == -1025
    assert ge.Xthlo == [0, 0]
    assert gh.A[0][0] == -7 and gh.A[1][1] == -6
    lg = cfg.cores[0].lgroups[0]
    assert lg.rr_bits == 6
    assert lg.hiac == [-7, -7, -7]


def test_erbp_feedback_rows_are_zero_sum():
    cfg, ids = erbp.build_erbp()
    h0, h1 = ids["hidden"]
    totals = {j: 0 for j in range(h0, h1)}
    ep0, ep1 = ids["err_pos"]
    for s in cfg.cores[0].synapses:
        if ep0 <= s.src < ep1 and h0 <= s.dst < h1 and s.comp == 1:
            totals[s.dst] += s.w
    assert all(v == 0 for v in totals.values())


def test_erbp_error_silence_short():
    """Identical prediction and label trains keep an error pair silent;
    an unmatched label alone drives the negative unit (baseline)."""
    silent = erbp.error_pair_spikes(ticks=2000, matched=True)
    assert silent == 0
    baseline = erbp.error_pair_spikes(ticks=2000, matched=False)
    assert baseline > 0


def test_spike_pattern_published_constants():
    cfg = pattern.build_pattern()
    g = cfg.cores[0].groups[0]
    assert g.b == [0, -1216, 0, 5]
    assert g.XspikeIncrVal == [0, 0, 1024, 0]
    assert g.Xthup[1] == 8 and g.Xthlo[1] == -2
    assert g.Xthlo[0] == 0
    assert g.A[0][0] == -4 and g.A[2][2] == -8
    assert g.modulator == 3


def test_report_crossings_and_missing_reference():
    nsat_trace = [(0.5, 100), (0.2, 250), (0.09, 500)]
    ref_trace = [(0.4, 80), (0.12, 300), (0.08, 700)]
    rows = report.synop_report(nsat_trace, ref_trace, targets=[0.2, 0.1])
    assert rows[0]["synops"] == 250
    assert rows[0]["macs"] is not None
    assert rows[1]["ratio"] is not None
    rows2 = report.synop_report(nsat_trace, None, targets=[0.2])
    assert rows2[0]["macs"] is None and rows2[0]["ratio"] is None
    text = report.format_report(rows)
    assert "error_target" in text and len(text.splitlines()) == 3


def test_dataset_idx_roundtrip(tmp_path):
    paths = make_surrogate(tmp_path, n_train=40, n_test=12, seed=1)
    tr = load_digit_files(*paths["train"])
    te = load_digit_files(*paths["test"])
    assert tr[0].shape == (40, 28, 28) and te[0].shape == (12, 28, 28)
    assert tr[1].max() <= 9
    with pytest.raises(DatasetError, match="missing"):
        load_digit_files(str(tmp_path / "nope.idx"), str(tmp_path / "nope2.idx"))
