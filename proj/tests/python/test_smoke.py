"""Smoke tests for the pyvpe extension module."""

import hashlib
import os
import random

import pytest

os.environ.setdefault("VESPO_TEST_MODE", "1")

import pyvpe  # noqa: E402

LHE_BITS = 768
ORDER = pyvpe.group_order()


def test_group_order_is_prime_sized():
    assert ORDER.bit_length() == 254


def test_horner_matches_python():
    rnd = random.Random(1)
    coeffs = [rnd.randrange(ORDER) for _ in range(20)]
    r = rnd.randrange(ORDER)
    expect = 0
    for c in reversed(coeffs):
        expect = (expect * r + c) % ORDER
    assert pyvpe.horner_eval(coeffs, r) == expect


def test_merkle_root_matches_reference():
    leaves = [bytes([i]) * 10 for i in range(7)]

    def h_leaf(b):
        return hashlib.sha256(b"\x00" + b).digest()

    def h_node(l, r):
        return hashlib.sha256(b"\x01" + l + r).digest()

    level = [h_leaf(l) for l in leaves]
    while len(level) > 1:
        nxt = [h_node(level[i], level[i + 1]) for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            nxt.append(level[-1])
        level = nxt
    assert pyvpe.merkle_root(leaves) == level[0]


def test_paillier_homomorphism():
    key = pyvpe.PaillierKey.generate(LHE_BITS, seed=7)
    a, b = 123456789, 987654321
    ca, cb = key.encrypt(a, seed=1), key.encrypt(b, seed=2)
    assert key.decrypt(ca.add(cb)) == a + b
    assert key.decrypt(ca.scale(10)) == 10 * a


def test_vespo_end_to_end():
    rnd = random.Random(2)
    coeffs = [rnd.randrange(ORDER) for _ in range(9)]
    client, server = pyvpe.vespo_setup(coeffs, lhe_bits=LHE_BITS, seed=11, workers=2)

    ch = client.challenge()
    ev = server.eval(ch.point, workers=2)
    z = client.verify(ch, ev)
    assert z == pyvpe.horner_eval(coeffs, ch.point)

    # a response for one challenge cannot answer another
    other = client.challenge()
    assert other.point != ch.point
    assert client.verify(other, ev) is None

    # dynamic update: value moves by delta * r^i
    delta = rnd.randrange(1, ORDER)
    assert client.update(server, 3, delta)
    coeffs[3] = (coeffs[3] + delta) % ORDER
    ch2 = client.challenge()
    z2 = client.verify(ch2, server.eval(ch2.point, workers=2))
    assert z2 == pyvpe.horner_eval(coeffs, ch2.point)

    # server state round-trips and still answers
    restored = pyvpe.VespoServer.from_bytes(server.to_bytes())
    ch3 = client.challenge()
    assert client.verify(ch3, restored.eval(ch3.point)) is not None


def test_dpor_audits_and_detects_corruption():
    data = bytes(random.Random(3).randrange(256) for _ in range(2500))
    client, server = pyvpe.dpor_init(data, shape="square", lhe_bits=LHE_BITS, seed=21)

    ch = client.challenge()
    assert client.audit_verify(ch, server.audit(ch.point)) is None

    # verified update, then audits still pass
    assert client.update(server, 0, 1, 424242)
    ch2 = client.challenge()
    assert client.audit_verify(ch2, server.audit(ch2.point)) is None

    # out-of-band corruption must be caught
    chunk = bytearray(server.entry_bytes(1, 1))
    chunk[0] ^= 0x80
    server.corrupt_entry(1, 1, bytes(chunk))
    ch3 = client.challenge()
    assert client.audit_verify(ch3, server.audit(ch3.point)) == "DOT_FAIL"


def test_capacity_guard_raises():
    with pytest.raises(RuntimeError):
        pyvpe.vespo_setup([1, 2, 3], lhe_bits=256, seed=5)
