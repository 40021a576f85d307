#pragma once

#include <string>
#include <vector>

#include "avq/av_identity.hpp"
#include "avq/core.hpp"

// Splits a whole gate sequence, not just one operator. The sequence is tiled
// into contiguous groups; each group's product is split off the current state
// with av_decompose, branching the state into an "expectation" child (state
// unchanged, amplitude times <group>) and an "orthogonal" child (state hops
// to the orthogonal direction, amplitude times the group's uncertainty).
// Leaves carry path strings over {E, O}, first group first, and the final
// state is recovered as the amplitude-weighted sum of leaf states.

namespace avq {

struct Gate {
  std::string label;  // free-form, shown in reports
  GateMatrix matrix;
};

// An ordered list of same-width unitaries, applied first-element-first.
class GateSequence {
 public:
  GateSequence(int n_qubits, std::vector<Gate> gates);

  int n_qubits() const { return n_qubits_; }
  std::size_t size() const { return gates_.size(); }
  const Gate& gate(std::size_t i) const;
  const std::vector<Gate>& gates() const { return gates_; }

 private:
  int n_qubits_;
  std::vector<Gate> gates_;
};

// Contiguous run gates [start, start + span]; its matrix is the product
// gate[start+span] * ... * gate[start] (application order).
struct Group {
  int start = 0;
  int span = 0;
  bool operator==(const Group&) const = default;
};

enum class PartitionMode { Whole, Singles };

// Groups in processing order, tiling [0, sequence size) exactly.
struct SubSequencePartition {
  std::vector<Group> groups;
};

SubSequencePartition make_partition(const GateSequence& seq,
                                    PartitionMode mode);
// Explicit tiling; throws InvalidPartition on gaps, overlaps, bad order, or
// out-of-range groups.
SubSequencePartition make_partition(const GateSequence& seq,
                                    std::vector<Group> groups);

GateMatrix group_matrix(const GateSequence& seq, const Group& group);

struct DecompositionLeaf {
  Complex amplitude;
  StateVector state;
  std::string path;  // one of {E, O} per group, first group first
};

// One surviving branch decision: which group, which side, the factor it
// contributed, and the state it was taken in.
struct FactorRecord {
  std::string group_label;
  char branch = 'E';  // 'E' or 'O'
  Complex factor;     // <group> for E, the (real) uncertainty for O
  std::string path;   // path of the child this factor created
};

struct DecompositionResult {
  int n_groups = 0;
  std::vector<DecompositionLeaf> leaves;  // sorted by path
  std::vector<FactorRecord> factors;      // every surviving branch, in order
  int pruned_count = 0;
  // Max-norm gap between the amplitude-weighted leaf sum and a direct
  // gate-by-gate simulation of the sequence.
  double reconstruction_residual = 0.0;
};

// Expands the full tree. A child is dropped (and counted) when its cumulative
// amplitude has modulus <= prune_tol or when its side does not exist (the
// orthogonal child of a degenerate split). threads > 1 fans node expansion
// within each level across that many workers; results are identical to the
// single-threaded run.
DecompositionResult decompose(const GateSequence& seq,
                              const SubSequencePartition& partition,
                              const StateVector& initial,
                              double prune_tol = 1e-12, int threads = 1,
                              const Tolerances& tol = {});

// One step of the all-orthogonal spine: splits g off prev and returns the
// orthogonal state (absent when degenerate) with its uncertainty factor.
std::pair<std::optional<StateVector>, double> orthogonal_chain(
    const StateVector& prev, const GateMatrix& g, const Tolerances& tol = {});

// Amplitude-weighted sum of leaf states in the computational basis.
Vector amplitudes_in_computational_basis(const DecompositionResult& result);

// Flat per-branch factor listing; the product of factors along a leaf's path
// equals that leaf's amplitude.
std::vector<FactorRecord> factor_report(const DecompositionResult& result);

// Gate-by-gate application of the whole sequence (no tree involved).
Vector simulate(const GateSequence& seq, const StateVector& initial);

// Rebases the sequence's total product against a new basis state: computes
// the generalized split of (product of all gates)|initial> with basis |phi>,
// gate k and scale q.
GeneralizedTerms rebase(const GateSequence& seq, const StateVector& initial,
                        const StateVector& phi, const GateMatrix& k, double q,
                        const Tolerances& tol = {});

// Optional post-pass: merges leaves whose states coincide (Re<a|b> within
// 1 - tol of 1), summing amplitudes and keeping the earlier path. Off the
// main code path; decompose never calls it.
DecompositionResult collapse_equal_leaves(const DecompositionResult& result,
                                          double tol = 1e-10);

}  // namespace avq
