import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minutiae_stego.codec import (
    BitPayload,
    CapacityError,
    EmbedConfig,
    EmbedError,
    FrameError,
    capacity,
    embed_bytes,
    embed_element_optimized,
    embed_element_plain,
    embed_template,
    extract_bytes,
    extract_template,
    frame_payload,
    order_adjust,
    unframe_payload,
)
from minutiae_stego.template import MinutiaeTemplate

from conftest import random_template, templates


# -- independent oracles -------------------------------------------------------

def plain_oracle(g, d, b):
    return (g & ~((1 << b) - 1)) | d


def optimized_oracle(g, d, b):
    """Scan the two blocks around g for values carrying d; the nearer wins,
    ties go to the larger (in-block) value."""
    m = 1 << b
    base = (g >> b) << b
    carriers = [v for v in range(base - m, base + m) if v % m == d]
    assert len(carriers) == 2
    return min(carriers, key=lambda v: (abs(v - g), -v))


def order_oracle(z, z_prev, b):
    if z >= z_prev:
        return z
    l = 1
    while z + l * (1 << b) < z_prev:
        l += 1
    return z + l * (1 << b)


def bits_oracle(t, b):
    cols = [[p.x for p in t], [p.y for p in t], [p.theta for p in t]]
    return "".join(format(v % (1 << b), f"0{b}b") for col in cols for v in col)


def lcg_bits(key, n):
    state, out = key, []
    for _ in range(n):
        state = (state * 6364136223846793005 + 1442695040888963407) % 2**64
        out.append(state >> 63)
    return out


# -- element level -------------------------------------------------------------

def test_plain_worked_example():
    assert embed_element_plain(12, 3, 2) == 15


def test_plain_clears_last_bit():
    assert embed_element_plain(43, 0, 1) == plain_oracle(43, 0, 1) == 42


@pytest.mark.parametrize("g", [0, 7, 43, 255, 1000])
@pytest.mark.parametrize("b", range(1, 9))
def test_plain_identity(g, b):
    assert embed_element_plain(g, g % (1 << b), b) == g


def test_optimized_worked_examples():
    assert embed_element_optimized(12, 3, 2) == 11
    assert embed_element_optimized(46, 2, 2) == 46
    assert embed_element_optimized(47, 1, 2) == 45


def test_optimized_can_go_negative():
    assert embed_element_optimized(1, 7, 3) == optimized_oracle(1, 7, 3) == -1


def test_optimized_tie_goes_to_add():
    # g=4, d=2, b=2: add=6 (q=2), sub=2 (p=2)
    assert embed_element_optimized(4, 2, 2) == 6 == optimized_oracle(4, 2, 2)


@pytest.mark.parametrize("fn", [embed_element_plain, embed_element_optimized])
def test_digit_out_of_range(fn):
    with pytest.raises(ValueError):
        fn(10, 4, 2)
    with pytest.raises(ValueError):
        fn(10, -1, 2)


@pytest.mark.parametrize("b", [1, 2, 3, 4])
def test_elements_match_oracles_exhaustively(b):
    for g in range(0, 256):
        for d in range(1 << b):
            assert embed_element_plain(g, d, b) == plain_oracle(g, d, b)
            assert embed_element_optimized(g, d, b) == optimized_oracle(g, d, b)


def test_order_adjust_examples():
    assert order_adjust(45, 46, 2) == 49
    assert order_adjust(50, 46, 2) == 50
    assert order_adjust(-1, 0, 3) == 7


@given(st.integers(-600, 600), st.integers(-600, 600), st.integers(1, 8))
def test_order_adjust_properties(z, z_prev, b):
    z2 = order_adjust(z, z_prev, b)
    assert z2 == order_oracle(z, z_prev, b)
    assert z2 >= z_prev or z2 == z
    assert (z2 - z) % (1 << b) == 0
    if z < z_prev:
        assert z2 - z < z_prev - z + (1 << b)


# -- framing -------------------------------------------------------------------

def test_frame_one_byte():
    p = frame_payload(b"\xff", 24, 0)
    assert str(p) == "0000000000001000" + "11111111"


def test_frame_empty():
    assert str(frame_payload(b"", 16)) == "0" * 16


def test_frame_padding_is_lcg_stream():
    p = frame_payload(b"\x01", 64, padding_key=12345)
    assert list(p.bits[24:]) == lcg_bits(12345, 40)


def test_frame_capacity_error():
    with pytest.raises(CapacityError, match="capacity"):
        frame_payload(b"abc", 39)
    frame_payload(b"abc", 40)


@given(st.binary(max_size=40), st.integers(0, 200), st.integers(0, 2**64 - 1))
def test_frame_roundtrip(data, extra, key):
    cap = 16 + 8 * len(data) + extra
    p = frame_payload(data, cap, key)
    assert p.length == cap
    assert unframe_payload(p) == data
    assert unframe_payload(p, key) == data


def test_unframe_rejects_bad_prefix():
    with pytest.raises(FrameError):
        unframe_payload(BitPayload.from_string("0000000001000000" + "0" * 8))
    with pytest.raises(FrameError):
        unframe_payload(BitPayload.from_string("0101"))


def test_unframe_checks_padding_key():
    p = frame_payload(b"hi", 200, padding_key=7)
    with pytest.raises(FrameError, match="padding"):
        unframe_payload(p, padding_key=8)


def test_bitpayload_bytes_roundtrip():
    assert BitPayload.from_bytes(b"\xa5\x01").to_bytes() == b"\xa5\x01"
    assert str(BitPayload.from_bytes(b"\xa5")) == "10100101"


# -- template level ------------------------------------------------------------

def test_capacity_formula(table_i):
    assert capacity(table_i, 2) == 36
    assert capacity(MinutiaeTemplate(), 5) == 0
    rng = random.Random(0)
    assert capacity(random_template(rng, 11), 1) == 33
    assert capacity(random_template(rng, 49), 3) == 441


def test_table_scenario_composes(table_i):
    # minutiae 4 and 5 carry "10" and "01" in x; y and theta carry what they hold
    t = MinutiaeTemplate.from_tuples([(46, 125, 214), (47, 114, 56)])
    bits = "10" + "01" + bits_oracle(t, 2)[4:]
    out, rep = embed_template(t, BitPayload.from_string(bits), EmbedConfig(b=2))
    assert [p.x for p in out] == [46, 49]
    assert rep.order_adjustments == 1
    assert rep.total_distortion == 2
    # the oracle: optimized element step then sequential order repair
    z1 = optimized_oracle(46, 2, 2)
    z2 = order_oracle(optimized_oracle(47, 1, 2), z1, 2)
    assert (z1, z2) == (46, 49)


def test_without_order_preservation_the_anomaly_appears():
    t = MinutiaeTemplate.from_tuples([(46, 125, 214), (47, 114, 56)])
    bits = "1001" + bits_oracle(t, 2)[4:]
    cfg = EmbedConfig(b=2, order_preserving=False)
    out, rep = embed_template(t, BitPayload.from_string(bits), cfg)
    assert [p.x for p in out] == [46, 45]
    assert not out.is_sorted()
    assert rep.order_adjustments == 0


@given(templates(max_size=30), st.integers(1, 8), st.sampled_from(["plain", "optimized"]))
def test_embedding_own_bits_is_identity(t, b, strategy):
    payload = BitPayload.from_string(bits_oracle(t, b))
    out, rep = embed_template(t, payload, EmbedConfig(b=b, strategy=strategy))
    assert out == t
    assert rep.total_distortion == 0 and rep.order_adjustments == 0


@settings(max_examples=200)
@given(
    templates(max_size=40, coord_max=4000),
    st.integers(1, 8),
    st.sampled_from(["plain", "optimized"]),
    st.booleans(),
    st.randoms(use_true_random=False),
)
def test_roundtrip_against_bit_oracle(t, b, strategy, op, rnd):
    bits = "".join(rnd.choice("01") for _ in range(capacity(t, b)))
    out, rep = embed_template(t, BitPayload.from_string(bits), EmbedConfig(b=b, strategy=strategy, order_preserving=op))
    assert bits_oracle(out, b) == bits
    assert str(extract_template(out, b)) == bits
    if op:
        assert out.is_sorted()
    for p in out:
        assert 0 <= p.theta < 360 and p.x >= 0 and p.y >= 0
    assert rep.elements_used == 3 * t.n
    assert rep.max_distortion <= rep.total_distortion


def test_extract_single_point():
    t = MinutiaeTemplate.from_tuples([(15, 0, 0)])
    assert str(extract_template(t, 2)) == "11" + "00" + "00"


@given(templates(max_size=20), st.integers(1, 8))
def test_extract_matches_oracle(t, b):
    assert str(extract_template(t, b)) == bits_oracle(t, b)


def test_extract_zero_payload():
    t = MinutiaeTemplate.from_tuples([(0, 8, 16), (32, 8, 24)])
    assert set(extract_template(t, 3).bits) == {0}


def test_extract_invariant_under_order_adjust():
    for z, prev, b in [(45, 46, 2), (-1, 0, 3), (3, 300, 5)]:
        assert order_adjust(z, prev, b) % (1 << b) == z % (1 << b)


def test_range_policy_theta_upper():
    # theta 359, b=4: add candidate 352+15=367 is illegal, 336+15=351 is used
    t = MinutiaeTemplate.from_tuples([(0, 0, 359)])
    bits = "0000" + "0000" + "1111"
    out, _ = embed_template(t, BitPayload.from_string(bits), EmbedConfig(b=4, strategy="plain"))
    assert out.points[0].theta == 351
    out, _ = embed_template(t, BitPayload.from_string(bits), EmbedConfig(b=4))
    assert out.points[0].theta == 351


def test_range_policy_negative():
    t = MinutiaeTemplate.from_tuples([(1, 1, 1)])
    out, _ = embed_template(t, BitPayload.from_string("111" * 3), EmbedConfig(b=3))
    assert out.points[0].as_tuple() == (7, 7, 7)


def test_order_overflow_is_an_embed_error():
    t = MinutiaeTemplate.from_tuples([(65535, 0, 0), (65535, 0, 0)])
    bits = "11" + "00" + "00" * 2 + "00" * 2
    with pytest.raises(EmbedError) as info:
        embed_template(t, BitPayload.from_string(bits), EmbedConfig(b=2))
    assert info.value.index == 2 and info.value.field == "x"


def test_payload_length_mismatch(table_i):
    with pytest.raises(EmbedError, match="capacity"):
        embed_template(table_i, BitPayload.from_string("01"), EmbedConfig(b=1))


def test_config_validation():
    for bad in [dict(b=0), dict(b=9), dict(strategy="lsb"), dict(padding_key=-1)]:
        with pytest.raises(ValueError):
            EmbedConfig(**bad)


def test_bytes_roundtrip(table_i):
    out, _ = embed_bytes(table_i, b"\x42", EmbedConfig(b=2, padding_key=99))
    assert extract_bytes(out, 2, 99) == b"\x42"
    assert extract_bytes(out, 2) == b"\x42"


def test_dominance_and_plain_bound():
    for b in range(1, 5):
        for g in range(1024):
            for d in range(1 << b):
                assert abs(embed_element_optimized(g, d, b) - g) <= abs(embed_element_plain(g, d, b) - g)
                assert abs(embed_element_plain(g, d, b) - g) <= (1 << b) - 1
