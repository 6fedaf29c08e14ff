import numpy as np

from hilproc import rng


def test_draws_are_deterministic():
    key = rng.derive_key(123, 4)
    a = rng.uniform_grid(key, -10, 10, 4)
    b = rng.uniform_grid(key, -10, 10, 4)
    assert np.array_equal(a, b)


def test_draws_do_not_depend_on_requested_range():
    key = rng.derive_key(99)
    wide = rng.uniform_grid(key, 1, 10, 2)
    narrow = rng.uniform_grid(key, 5, 10, 2)
    assert np.array_equal(wide[4:], narrow)


def test_negative_indices_are_valid_counters():
    key = rng.derive_key(7)
    wide = rng.uniform_grid(key, -8, 3, 1)
    narrow = rng.uniform_grid(key, -8, -6, 1)
    assert np.array_equal(wide[:3], narrow)


def test_distinct_keys_give_distinct_streams():
    a = rng.uniform_grid(rng.derive_key(1, 2), 0, 100, 1)
    b = rng.uniform_grid(rng.derive_key(1, 3), 0, 100, 1)
    assert not np.allclose(a, b)


def test_derive_key_accepts_arrays():
    keys = rng.derive_key(5, 6, np.arange(8))
    assert keys.shape == (8,)
    assert len(set(keys.tolist())) == 8
    single = rng.derive_key(5, 6, 3)
    assert keys[3] == single


def test_values_lie_strictly_inside_unit_interval():
    u = rng.uniforms(rng.derive_key(0), np.arange(100_000), 1)
    assert u.min() > 0.0
    assert u.max() < 1.0


def test_uniform_moments_and_serial_correlation():
    u = rng.uniforms(rng.derive_key(42), np.arange(2_000_000), 1).ravel()
    m = u.size
    assert abs(u.mean() - 0.5) < 4 * np.sqrt(1 / 12 / m)
    assert abs(u.var() - 1 / 12) < 5e-4
    corr = np.corrcoef(u[:-1], u[1:])[0, 1]
    assert abs(corr) < 4 / np.sqrt(m)


def test_slots_within_one_index_are_distinct():
    u = rng.uniforms(rng.derive_key(3), np.arange(1000), 4)
    flat = u.reshape(-1)
    assert len(np.unique(flat)) == flat.size
