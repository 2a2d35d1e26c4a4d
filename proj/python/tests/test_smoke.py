import pathlib

import pytest

import pirates

ROOT = pathlib.Path(__file__).resolve().parents[2]


def test_pir_roundtrip():
    rng = pirates.Rng(3)
    keys = pirates.pir_setup(128, 16, rng)
    items = [rng.bytes(48) for _ in range(16)]
    state, query = pirates.pir_query(keys, 5, len(items), 48, rng)
    answer = pirates.pir_answer(keys, items, query)
    assert pirates.pir_decode(keys, state, answer) == items[4]


def test_mapping_and_selection():
    m = pirates.build_mapping(20, pirates.n_buckets_for(3), bytes(16))
    assert m.n_buckets == 3
    assert sorted(m.buckets_of(7)) == [1, 2, 3]
    sel = pirates.select_indices([4, 9], m, pirates.Rng(1))
    assert not sel["all_random"]
    assert len(sel["positions"]) == 3


def test_sym_cipher_rejects_wrong_key():
    c = pirates.SymCipher(30)
    key, iv = bytes(range(32)), bytes(16)
    ct = c.encrypt(key, iv, b"hello")
    assert len(ct) == c.ciphertext_size
    assert c.decrypt(key, iv, ct) == b"hello"
    with pytest.raises(pirates.PiratesError):
        c.decrypt(bytes(32), iv, ct)


def test_scenario_run(tmp_path):
    s = pirates.load_scenario(str(ROOT / "scenarios" / "small_call.txt"))
    r = pirates.run_scenario(s, str(tmp_path))
    assert r["completed"]
    assert r["calls"]["ok"]
    assert (tmp_path / "transcript.csv").exists()


def test_models():
    addra, ours = pirates.scalability(220)
    assert ours < addra
    assert pirates.additional_ms(100) == 125
    assert pirates.search_snippet(40, 100, 20, lambda ms: 50.0) == 60
    mean, _ = pirates.bench_dialing(256, 4, "gaddra", reps=2)
    assert mean > 0
