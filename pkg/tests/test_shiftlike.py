import json
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import tractable_dyn as td
from tractable_dyn import Word


def w2(text):
    return Word.from_string(2, text)


def random_code(rng, max_window=3):
    window = rng.randint(1, max_window)
    phi = tuple(rng.randrange(2) for _ in range(2 ** window))
    return td.SlidingBlockCode(2, window, phi)


def random_word(rng, length, n_symbols=2):
    return Word.from_digits(
        n_symbols, [rng.randrange(n_symbols) for _ in range(length)])


digit_lists = st.lists(st.integers(0, 1), min_size=0, max_size=40)


# --- words ---


def test_word_packing_is_first_symbol_first():
    assert w2("01").value == 2
    assert w2("10").value == 1
    assert w2("0110").digits() == (0, 1, 1, 0)


@given(digit_lists)
def test_word_digit_round_trip(digits):
    word = Word.from_digits(2, digits)
    assert word.digits() == tuple(digits)
    assert Word.from_string(2, word.to_string()) == word


@given(digit_lists, digit_lists, digit_lists)
def test_concat_is_associative(a, b, c):
    x, y, z = (Word.from_digits(2, d) for d in (a, b, c))
    assert x.concat(y).concat(z) == x.concat(y.concat(z))


@given(digit_lists, st.integers(0, 40))
def test_prefix_and_drop_partition_a_word(digits, cut):
    word = Word.from_digits(2, digits)
    cut = min(cut, word.length)
    assert word.prefix(cut).concat(word.drop(cut)) == word


def test_word_rejects_bad_digits():
    with pytest.raises(td.ValidationError):
        Word.from_digits(2, [0, 2])
    with pytest.raises(td.ValidationError):
        Word.from_string(2, "0x1")


def test_all_words_enumerates_by_packed_value():
    words = td.all_words(2, 3)
    assert [w.to_string() for w in words[:4]] == ["000", "100", "010", "110"]
    assert len(words) == 8
    with pytest.raises(td.CapExceededError):
        td.all_words(2, 30, cap=2 ** 20)


# --- sliding-block codes ---


def test_code_apply_shrinks_by_window_minus_one():
    shift = td.SlidingBlockCode(2, 2, (0, 0, 1, 1))
    assert shift.apply(w2("0110")).to_string() == "110"
    identity = td.SlidingBlockCode(2, 1, (0, 1))
    assert identity.apply(w2("0110")) == w2("0110")


def test_derive_gamma_identity_code():
    system = td.derive_gamma(td.SlidingBlockCode(2, 1, (0, 1)), 1)
    assert (system.n, system.k) == (1, 1)
    assert system.gamma == (0, 1, 0, 1)


def test_derive_gamma_shift_code():
    system = td.derive_gamma(td.SlidingBlockCode(2, 2, (0, 0, 1, 1)), 1)
    assert system.gamma == (0, 0, 1, 1)
    rng = random.Random(3)
    for _ in range(20):
        prefix = random_word(rng, rng.randint(2, 30))
        assert td.apply_g(system, prefix) == prefix.drop(1)


def test_derived_system_matches_code_to_depth_n():
    rng = random.Random(5)
    for _ in range(100):
        code = random_code(rng)
        n = rng.randint(1, 2)
        system = td.derive_gamma(code, n)
        assert system.k == max(code.window - 1, 1)
        prefix = random_word(rng, n + system.k + code.window)
        assert code.apply(prefix).prefix(n) == \
            td.apply_g(system, prefix).prefix(n)


def test_derive_gamma_cap():
    with pytest.raises(td.CapExceededError):
        td.derive_gamma(td.SlidingBlockCode(2, 2, (0, 0, 1, 1)), 40)


# --- the shift-like map ---


def test_apply_g_replaces_the_leading_block():
    shift = td.ShiftLikeSystem(2, 1, 1, (0, 0, 1, 1))
    assert td.apply_g(shift, w2("0110")).to_string() == "110"
    # the map derived from the identity still drops k symbols behind the
    # replaced block: it is not the identity on finite prefixes
    keep_first = td.ShiftLikeSystem(2, 1, 1, (0, 1, 0, 1))
    assert td.apply_g(keep_first, w2("0110")).to_string() == "010"


@given(digit_lists.filter(lambda d: len(d) >= 2))
def test_apply_g_length_contract(digits):
    system = td.ShiftLikeSystem(2, 1, 1, (0, 0, 1, 1))
    word = Word.from_digits(2, digits)
    assert td.apply_g(system, word).length == word.length - system.k


def test_apply_g_reports_required_length():
    system = td.ShiftLikeSystem(2, 2, 2, tuple(i % 4 for i in range(16)))
    with pytest.raises(td.WordError, match="4"):
        td.apply_g(system, w2("011"))


# --- coding and decoding ---


def test_code_R_on_the_shift():
    system = td.ShiftLikeSystem(2, 1, 1, (0, 0, 1, 1))
    track = td.code_R(system, w2("010101"), 3)
    assert [u.to_string() for u in track] == ["01", "10", "01", "10"]


def test_code_R_constant_for_identity_code():
    identity = td.SlidingBlockCode(2, 1, (0, 1))
    track = td.code_R(identity, w2("0110111"), 4, n=1, k=1)
    assert [u.to_string() for u in track] == ["01"] * 5


def test_code_R_pairs_live_in_the_fine_relation():
    rng = random.Random(11)
    for _ in range(30):
        code = random_code(rng)
        n = rng.randint(1, 2)
        system = td.derive_gamma(code, n)
        depth = rng.randint(1, 6)
        prefix = random_word(rng, n + system.k + depth * system.k + 2)
        track = td.code_R(system, prefix, depth)
        assert len(track) == depth + 1
        for t1, t2 in zip(track, track[1:]):
            # overlap law straight from the table
            assert t2.value % (2 ** system.n) == system.gamma[t1.value]


def test_code_R_reports_required_length():
    system = td.ShiftLikeSystem(2, 1, 1, (0, 0, 1, 1))
    with pytest.raises(td.WordError, match="12"):
        td.code_R(system, w2("0101"), 10)


def test_decode_constant_track():
    system = td.ShiftLikeSystem(2, 1, 1, (0, 1, 0, 1))
    track = [w2("01")] * 4
    assert td.decode_H(system, track).to_string() == "01111"


def test_decode_shift_track():
    system = td.ShiftLikeSystem(2, 1, 1, (0, 0, 1, 1))
    track = [w2(t) for t in ("01", "10", "01")]
    assert td.decode_H(system, track).to_string() == "0101"


def test_decode_rejects_broken_tracks():
    system = td.ShiftLikeSystem(2, 1, 1, (0, 0, 1, 1))
    with pytest.raises(td.WordError):
        td.decode_H(system, [w2("01"), w2("01")])


def test_round_trip_small_systems_exhaustively():
    """decode then re-code is the identity on every track, and vice versa."""
    for value in range(16):
        gamma = tuple((value >> t) & 1 for t in range(4))
        system = td.ShiftLikeSystem(2, 1, 1, gamma)
        tracks = [[u] for u in td.all_words(2, 2)]
        for _ in range(4):
            tracks = [t + [u] for t in tracks for u in td.all_words(2, 2)
                      if u.value % 2 == system.gamma[t[-1].value]]
        for track in tracks:
            decoded = td.decode_H(system, track)
            assert td.code_R(system, decoded, len(track) - 1) == track
        rng = random.Random(value)
        for _ in range(10):
            prefix = random_word(rng, 2 + 4)
            track = td.code_R(system, prefix, 4)
            assert td.decode_H(system, track) == prefix


# --- shadowing ---


def test_shadow_identity_code_pins_the_leading_block():
    code = td.SlidingBlockCode(2, 1, (0, 1))
    system = td.derive_gamma(code, 1)
    rng = random.Random(13)
    for _ in range(10):
        x = random_word(rng, 30)
        y = td.shadow_Q(code, system, x, 10)
        assert y.prefix(2) == x.prefix(2)


def test_shadow_shift_code_with_wide_window():
    code = td.SlidingBlockCode(2, 2, (0, 0, 1, 1))
    system = td.derive_gamma(code, 2)
    rng = random.Random(17)
    for _ in range(10):
        x = random_word(rng, 40)
        y = td.shadow_Q(code, system, x, 10)
        assert td.code_R(code, x, 10, n=system.n, k=system.k) == \
            td.code_R(system, y, 10)


def test_shadow_tracks_random_codes():
    rng = random.Random(19)
    for _ in range(10):
        code = random_code(rng)
        n = rng.randint(1, 2)
        system = td.derive_gamma(code, n)
        block = system.n + system.k
        steps = 20
        x = random_word(rng, block + steps * max(code.window - 1, 1) + 4)
        y = td.shadow_Q(code, system, x, steps)
        fx, gy = x, y
        for _ in range(steps + 1):
            assert fx.prefix(block) == gy.prefix(block)
            fx = code.apply(fx)
            gy = td.apply_g(system, gy)


# --- measures and reports ---


def test_bernoulli_cylinder_values():
    assert td.bernoulli_cylinder(2, w2("01")) == Fraction(1, 4)
    with pytest.raises(td.ValidationError):
        td.bernoulli_cylinder(2, Word.from_digits(2, []))
    word = w2("0110")
    assert td.bernoulli_cylinder(2, word) == \
        sum(td.bernoulli_cylinder(2, word.concat(w2(str(a)))) for a in range(2))


def test_report_full_shift(full_shift):
    data = td.tractability_report_shiftlike(full_shift).to_json_dict()
    assert data["basic_sets"] == [["0", "1"]]
    assert data["fine_basic_sets"] == [["00", "10", "01", "11"]]
    assert data["terminal"] == [["0", "1"]]
    assert data["transient"] == []
    assert data["stationary"] == [{
        "class": ["0", "1"],
        "fine_class": ["00", "10", "01", "11"],
        "weights": {"0": "1/2", "1": "1/2"},
    }]
    assert data["decay"] == {"n": 1, "rho": 0.0}


def test_report_keep_first_splits_by_leading_symbol():
    system = td.ShiftLikeSystem(2, 1, 1, (0, 1, 0, 1))
    data = td.tractability_report_shiftlike(system).to_json_dict()
    assert data["basic_sets"] == [["0"], ["1"]]
    assert data["fine_basic_sets"] == [["00", "01"], ["10", "11"]]
    assert data["terminal"] == [["0"], ["1"]]


def test_report_constant_gamma_absorbs_at_zero():
    system = td.ShiftLikeSystem(2, 1, 1, (0, 0, 0, 0))
    data = td.tractability_report_shiftlike(system).to_json_dict()
    assert data["basic_sets"] == [["0"]]
    assert data["fine_basic_sets"] == [["00", "01"]]
    assert data["transient"] == ["1"]
    assert data["stationary"] == [{
        "class": ["0"],
        "fine_class": ["00", "01"],
        "weights": {"0": "1"},
    }]
    assert data["decay"] == {"n": 1, "rho": 0.0}


def test_report_is_deterministic(full_shift):
    first = json.dumps(td.tractability_report_shiftlike(full_shift).to_json_dict())
    second = json.dumps(td.tractability_report_shiftlike(full_shift).to_json_dict())
    assert first == second


# --- serialization ---


def test_system_json_round_trip(full_shift):
    data = td.shiftlike.system_to_json(full_shift)
    assert td.shiftlike.system_from_json(data) == full_shift


def test_system_json_checks_cap_before_the_table():
    data = {"N": 2, "n": 20, "k": 20, "gamma": [0]}
    with pytest.raises(td.CapExceededError):
        td.shiftlike.system_from_json(data)


def test_code_json_rejects_wrong_table_size():
    with pytest.raises(td.ValidationError):
        td.shiftlike.code_from_json({"N": 2, "m": 2, "phi": [0, 1]})
