import math

import numpy as np
import pytest

from oneshot_qcomp.ensemble import (
    EnsembleParams,
    generate_jrs,
    ensemble_average,
    jrs_certificate,
    load,
    qic_prepare_send,
    save,
    to_cq_state,
)
from oneshot_qcomp.entropy import (
    max_relative_entropy,
    mutual_info_cq,
    relative_entropy,
    verify_imax_certificate,
)
from oneshot_qcomp.errors import InvalidInputError, ParseError
from oneshot_qcomp.qcore import RngSeed


def test_params_validation_and_derived_sizes():
    p = EnsembleParams(m=12, k=3, groups=2, seed=0)
    assert p.n == 6 and p.block == 4
    assert p.seed == RngSeed(0)
    with pytest.raises(InvalidInputError):
        EnsembleParams(m=10, k=3, groups=1, seed=0)
    with pytest.raises(InvalidInputError):
        EnsembleParams(m=0, k=1, groups=1, seed=0)


def test_spectra_are_flat_on_a_block():
    e = generate_jrs(EnsembleParams(m=8, k=2, groups=3, seed=5))
    for s in e.states():
        evals = np.sort(np.linalg.eigvalsh(s.mat))
        np.testing.assert_allclose(evals[: 8 - 4], 0.0, atol=1e-10)
        np.testing.assert_allclose(evals[8 - 4 :], 2.0 / 8.0, atol=1e-10)


def test_blocks_of_one_basis_tile_the_identity():
    e = generate_jrs(EnsembleParams(m=12, k=3, groups=2, seed=7))
    for i in range(2):
        acc = sum(e.state(i, j).mat for j in range(3))
        np.testing.assert_allclose(acc, (3.0 / 12.0) * np.eye(12), atol=1e-10)


def test_ensemble_average_is_maximally_mixed():
    e = generate_jrs(EnsembleParams(m=8, k=4, groups=5, seed=1))
    avg = ensemble_average(e)
    np.testing.assert_allclose(avg.mat, np.eye(8) / 8, atol=1e-10)


def test_generation_is_seed_deterministic():
    p = EnsembleParams(m=8, k=2, groups=2, seed=9)
    e1, e2 = generate_jrs(p), generate_jrs(p)
    for a, b in zip(e1.states(), e2.states()):
        np.testing.assert_array_equal(a.mat, b.mat)
    e3 = generate_jrs(EnsembleParams(m=8, k=2, groups=2, seed=10))
    assert not np.allclose(e1.state(0, 0).mat, e3.state(0, 0).mat)


def test_relative_entropies_hit_log_k():
    e = generate_jrs(EnsembleParams(m=8, k=2, groups=2, seed=3))
    avg = ensemble_average(e)
    for s in e.states():
        assert relative_entropy(s, avg) == pytest.approx(1.0, abs=1e-8)
        assert max_relative_entropy(s, avg) == pytest.approx(1.0, abs=1e-8)


def test_cq_view_and_information_costs():
    e = generate_jrs(EnsembleParams(m=8, k=2, groups=4, seed=11))
    tau = to_cq_state(e)
    assert tau.n == 8
    np.testing.assert_allclose(tau.probs, np.full(8, 1 / 8), atol=1e-15)
    assert mutual_info_cq(tau) == pytest.approx(1.0, abs=1e-8)
    assert qic_prepare_send(e) == pytest.approx(0.5, abs=1e-8)


def test_closed_form_certificate_passes_verifier_exactly():
    e = generate_jrs(EnsembleParams(m=12, k=3, groups=2, seed=13))
    cert = jrs_certificate(e)
    assert cert.value == math.log2(3) and cert.gap == 0.0
    ok, report = verify_imax_certificate(to_cq_state(e), cert, tol=1e-9)
    assert ok
    # analytic pair: no slack needed anywhere
    assert report["gap_bits"] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("fmt,ext", [("json", ".json"), ("bin", ".bin")])
def test_save_load_round_trip(tmp_path, fmt, ext):
    e = generate_jrs(EnsembleParams(m=8, k=2, groups=2, seed=17))
    path = tmp_path / f"ens{ext}"
    save(e, path, fmt=fmt)
    back = load(path)
    assert back.params == e.params
    for a, b in zip(back.states(), e.states()):
        np.testing.assert_array_equal(a.mat, b.mat)  # bit-exact both ways


def test_save_infers_format_from_extension(tmp_path):
    e = generate_jrs(EnsembleParams(m=4, k=2, groups=1, seed=19))
    jpath, bpath = tmp_path / "a.json", tmp_path / "a.bin"
    save(e, jpath)
    save(e, bpath)
    assert jpath.read_bytes().lstrip()[:1] == b"{"
    assert bpath.read_bytes()[:1] != b"{"
    for p in (jpath, bpath):
        back = load(p)
        np.testing.assert_array_equal(back.state(0, 0).mat, e.state(0, 0).mat)


def test_load_rejects_truncation_and_garbage(tmp_path):
    e = generate_jrs(EnsembleParams(m=4, k=2, groups=1, seed=23))
    path = tmp_path / "ens.bin"
    save(e, path, fmt="bin")
    raw = path.read_bytes()
    (tmp_path / "trunc.bin").write_bytes(raw[:-7])
    with pytest.raises(ParseError):
        load(tmp_path / "trunc.bin")
    (tmp_path / "extra.bin").write_bytes(raw + b"\x00")
    with pytest.raises(ParseError):
        load(tmp_path / "extra.bin")
    (tmp_path / "bad.json").write_text('{"m": 4, "k": 2}')
    with pytest.raises(ParseError):
        load(tmp_path / "bad.json")


def test_json_artifact_is_canonical(tmp_path):
    e = generate_jrs(EnsembleParams(m=4, k=2, groups=1, seed=29))
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    save(e, p1)
    save(e, p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert p1.read_bytes().endswith(b"\n")
