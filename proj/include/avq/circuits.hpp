#pragma once

#include <cstdint>
#include <optional>
#include <set>

#include "avq/core.hpp"
#include "avq/decompose.hpp"

// Builders for the named single-qubit gates and the three worked circuits
// (Deutsch, Grover, phase estimation). Bit order everywhere: qubit 0 is the
// most significant bit of a basis index.

namespace avq {

enum class GateName { I, X, Y, Z, H, S, T };

// The 2x2 matrix of a named gate.
Matrix gate2(GateName name);

// Embeds an arbitrary 2x2 block on `target` inside an n-qubit identity.
GateMatrix embed_single(const Matrix& block, int n_qubits, int target,
                        bool unitary = true);

// Named gate on one qubit of an n-qubit register.
GateMatrix standard_gate(GateName name, int n_qubits, int target);

// |1> on `control` flips `target`; identity otherwise.
GateMatrix controlled_not(int n_qubits, int control, int target);

// diag(1, e^{i radians}) on `target`.
GateMatrix phase_shift(int n_qubits, int target, double radians);

// Diagonal reflection: -1 on the listed basis states, +1 elsewhere.
GateMatrix phase_flip(int n_qubits, const std::set<std::uint64_t>& indices);

// Full-register inverse Fourier transform: entry (j, k) is
// 2^{-n/2} e^{-2 pi i j k / 2^n}, big-endian indices.
GateMatrix iqft(int n_qubits);

// Controlled application of `block` (a gate on the trailing block_qubits
// qubits) when `control` is |1>. The block must sit at the bottom of the
// register, i.e. qubits n - block_qubits .. n - 1.
GateMatrix controlled_block(int n_qubits, int control,
                            const GateMatrix& block);

// Which function the Deutsch oracle hides, or which basis states a phase
// oracle flips.
struct OracleSpec {
  enum class Kind { Const0, Const1, IdentityBalanced, NotBalanced, Marked };
  Kind kind = Kind::Const0;
  std::set<std::uint64_t> marked;  // used only when kind == Marked

  static OracleSpec deutsch(Kind k);
  static OracleSpec grover(std::set<std::uint64_t> marked_set);
};

// Two-qubit bit-flip oracle |x>|y> -> |x>|y xor f(x)> for the four Deutsch
// functions. Query qubit 0, answer qubit 1.
GateMatrix deutsch_oracle(OracleSpec::Kind kind);

// The four-gate Deutsch interferometer: X on the answer qubit, Hadamards on
// both, the oracle, Hadamard on the query qubit. Measuring the query qubit
// then reads out |0> for constant functions and |1> for balanced ones.
GateSequence deutsch_sequence(OracleSpec::Kind kind);

// The pieces Grover search is assembled from, as dense n-qubit operators.
struct GroverPieces {
  GateMatrix phase_oracle;     // flips the sign of every marked basis state
  GateMatrix zero_reflection;  // flips the sign of |0...0>
  GateMatrix preparation;      // H on every qubit
  GateMatrix sub_first;        // preparation^dag after the phase oracle
  GateMatrix sub_second;       // preparation after the zero reflection
  GateMatrix grover_operator;  // sub_second * sub_first
};

GroverPieces grover_pieces(int n_qubits, const OracleSpec& oracle);

// [preparation, sub_first, sub_second, sub_first, sub_second, ...] with
// `iterations` repetitions of the pair, starting from |0...0>.
GateSequence grover_sequence(int n_qubits, const OracleSpec& oracle,
                             int iterations);

// Phase estimation over n_count counting qubits (most significant first)
// followed by the eigenstate register. When `phase` is given, U|eigenstate>
// = e^{i phase}|eigenstate> is verified at build time.
struct QpeSpec {
  int n_count = 1;
  GateMatrix unitary;
  StateVector eigenstate;
  std::optional<double> phase;
};

// [H on each counting qubit (one gate), controlled powers of U, inverse QFT
// on the counting register]. Counting qubit c controls U^(2^(n_count-1-c)).
GateSequence qpe_sequence(const QpeSpec& spec);

// |0...0> on the counting register tensored with the eigenstate.
StateVector qpe_initial(const QpeSpec& spec);

}  // namespace avq
