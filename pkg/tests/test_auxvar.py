import cmath
import math
import tracemalloc

import numpy as np
import pytest
from conftest import supported_circuit

from gatesim.circuit import (Circuit, Instruction, Opcode, gen_ghz_chain, gen_hadamard_wall,
                             gen_qft, parse_program)
from gatesim.engines import ExactEngine
from gatesim.engines.auxvar import (AuxvarEngine, HsParameter, UnsupportedInstruction, amplitudes,
                                    compile_to_paths, parse_query, reconstruct,
                                    solve_hs)

S2 = 1 / math.sqrt(2)


def exact_amplitudes(circuit):
    eng = ExactEngine()
    eng.run(circuit, 1)
    return eng.backend.state.amplitudes


class TestHs:
    def test_zero_angle(self):
        hs = solve_hs(0.0)
        assert hs.x == 0
        for s in (1, -1):
            np.testing.assert_array_equal(hs.factor(s), np.eye(2))

    def test_defining_relation(self, rng):
        for a in rng.uniform(-2 * np.pi, 2 * np.pi, 50):
            assert abs(cmath.cos(2 * solve_hs(a).x) - cmath.exp(0.5j * a)) <= 1e-12

    def test_pi_sign_pairs(self):
        hs = solve_hs(math.pi)
        assert abs(cmath.cos(2 * hs.x) - 1j) <= 1e-12
        for s0 in (1, -1):
            for s1 in (1, -1):
                lhs = cmath.exp(1j * math.pi * s0 * s1 / 4)
                rhs = cmath.exp(-1j * math.pi / 4) / 2 * sum(
                    cmath.exp(1j * hs.x * (s0 + s1) * s) for s in (1, -1))
                assert abs(lhs - rhs) <= 1e-12

    def test_reconstruction(self, rng):
        for a in rng.uniform(-np.pi, np.pi, 100):
            want = np.diag([1, 1, 1, cmath.exp(1j * a)])
            assert np.abs(reconstruct(solve_hs(a)) - want).max() <= 1e-12

    def test_single_configuration_not_unitary(self):
        m = solve_hs(1.0).factor(1)
        assert np.abs(m @ m.conj().T - np.eye(2)).max() > 1e-3


class TestCompile:
    def test_ghz3(self):
        prog = compile_to_paths(gen_ghz_chain(3))
        assert prog.p_count == 2
        assert all(len(line) <= 5 for line in prog.timelines)

    def test_single_qubit_only(self):
        prog = compile_to_paths(gen_hadamard_wall(5))
        assert prog.p_count == 0 and prog.weight == 1.0

    def test_qft3(self):
        c = Circuit(3, gen_qft(range(3)))
        cphases = sum(i.opcode in (Opcode.CPHASE, Opcode.CPHASE_DAG) for i in c.instructions)
        cnots = sum(i.opcode is Opcode.CNOT for i in c.instructions)
        assert cphases == 3
        assert compile_to_paths(c).p_count == cphases + cnots

    def test_p_counts_entanglers(self, rng):
        c = supported_circuit(rng, 6, 40, 9)
        n2 = sum(len(i.qubits) == 2 for i in c.instructions)
        assert compile_to_paths(c).p_count == n2

    def test_factor_identity(self, rng):
        prog = compile_to_paths(supported_circuit(rng, 5, 30, 8))
        for _, _, a, x in prog.factors:
            got = reconstruct(HsParameter(a, x))
            assert np.abs(got - np.diag([1, 1, 1, cmath.exp(1j * a)])).max() <= 1e-12

    def test_cost(self):
        prog = compile_to_paths(gen_ghz_chain(4))
        assert prog.cost(5) == 4 * 5 * 8

    @pytest.mark.parametrize("line", ["TOFFOLI 0 1 2", "M 1", "CLEAR 0", "SET 2",
                                      "SHORBOX 1 2 1"])
    def test_rejections_name_instruction(self, line):
        c = parse_program(f"QUBITS 3\nH 0\n{line}")
        with pytest.raises(UnsupportedInstruction) as exc:
            compile_to_paths(c)
        assert line.split()[0] in str(exc.value) and "line 3" in str(exc.value)

    def test_rejects_active_noise(self):
        c = parse_program("QUBITS 2\nDEPOLARIZING CHANNEL P_X = 0.1\nH 0")
        with pytest.raises(UnsupportedInstruction, match="DEPOLARIZING"):
            compile_to_paths(c)

    def test_accepts_zero_noise(self):
        c = parse_program("QUBITS 2\nDEPOLARIZING CHANNEL P_X = 0\nH 0\nBEGIN MEASUREMENT")
        assert compile_to_paths(c).p_count == 0


class TestAmplitudes:
    def test_ghz3_query(self):
        got = amplitudes(compile_to_paths(gen_ghz_chain(3)), [0b000, 0b111, 0b101])
        np.testing.assert_allclose(got, [S2, S2, 0], atol=1e-12)

    def test_product_state(self):
        got = amplitudes(compile_to_paths(gen_hadamard_wall(7)), [0])
        assert abs(got[0] - 2 ** -3.5) <= 1e-15

    def test_eight_qubits_ten_phases(self, rng):
        body = [Instruction(Opcode.H, (q,)) for q in range(8)]
        for _ in range(10):
            a, b = (int(v) for v in rng.choice(8, 2, replace=False))
            body.append(Instruction(Opcode.CPHASE, (a, b), ints=(int(rng.integers(1, 5)),)))
            body.append(Instruction(Opcode.U3, (a,), angles=tuple(rng.uniform(-3, 3, 3))))
        c = Circuit(8, tuple(body))
        prog = compile_to_paths(c)
        assert prog.p_count == 10
        assert np.abs(amplitudes(prog) - exact_amplitudes(c)).max() <= 1e-9

    def test_random_oracle(self, rng):
        for _ in range(15):
            n = int(rng.integers(2, 9))
            c = supported_circuit(rng, n, 40, 10)
            full = amplitudes(compile_to_paths(c))
            assert np.abs(full - exact_amplitudes(c)).max() <= 1e-9
            assert abs(np.sum(np.abs(full) ** 2) - 1) <= 1e-9

    def test_query_matches_full(self, rng):
        c = supported_circuit(rng, 7, 50, 10)
        prog = compile_to_paths(c)
        full = amplitudes(prog)
        q = [3, 100, 0, 127, 3]
        np.testing.assert_allclose(amplitudes(prog, q), full[q], atol=1e-13)

    @pytest.mark.parametrize("parts", [2, 3, 7, 64])
    def test_partition_invariance(self, rng, parts):
        c = supported_circuit(rng, 6, 50, 10)
        prog = compile_to_paths(c)
        one = amplitudes(prog, [0, 5, 63])
        split = amplitudes(prog, [0, 5, 63], parts=parts)
        assert np.abs(one - split).max() <= 1e-13

    def test_bad_query(self):
        prog = compile_to_paths(gen_ghz_chain(3))
        for q in ([], [8], [-1]):
            with pytest.raises(ValueError):
                amplitudes(prog, q)

    def test_memory_independent_of_width(self):
        # few queried amplitudes: live memory stays far below one state vector
        peaks = {}
        for n in (8, 16, 24):
            prog = compile_to_paths(gen_ghz_chain(n))
            amplitudes(prog, [0, 1])  # compile kernels outside the measurement
            tracemalloc.start()
            got = amplitudes(prog, [0, (1 << n) - 1, 1])
            _, peak = tracemalloc.get_traced_memory()
            tracemalloc.stop()
            np.testing.assert_allclose(got, [S2, S2, 0], atol=1e-12)
            peaks[n] = peak
        assert peaks[24] < 64 * 1024
        assert peaks[24] < 4 * peaks[8] + 16 * 1024


class TestQuery:
    def test_bitstrings(self):
        assert parse_query(["000", "101", "111"], 3) == [0, 5, 7]

    def test_hex(self):
        assert parse_query(["0x5", "0XF"], 4) == [5, 15]

    @pytest.mark.parametrize("bad", ["01", "0x10", "abc", ""])
    def test_bad_labels(self, bad):
        with pytest.raises(ValueError):
            parse_query([bad], 4 if bad != "01" else 3)


class TestEngine:
    def test_run(self):
        res = AuxvarEngine().run(gen_ghz_chain(3), [0, 7])
        assert res.engine == "auxvar"
        assert abs(res.amplitudes[7] - S2) < 1e-12
        assert res.diagnostics["p_count"] == 2

    def test_stops_at_events(self):
        c = parse_program("QUBITS 3\nH 0\nGENERATE EVENTS 4 1\nTOFFOLI 0 1 2")
        assert compile_to_paths(c).p_count == 0
