#include "avq/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <utility>

namespace avq {

GateSequence::GateSequence(int n_qubits, std::vector<Gate> gates)
    : n_qubits_(n_qubits), gates_(std::move(gates)) {
  if (n_qubits_ < 1) throw InvalidParams("sequence needs at least 1 qubit");
  for (const auto& g : gates_) {
    if (g.matrix.n_qubits() != n_qubits_) {
      throw DimensionMismatch("gate '" + g.label + "' acts on " +
                              std::to_string(g.matrix.n_qubits()) +
                              " qubits in a " + std::to_string(n_qubits_) +
                              "-qubit sequence");
    }
    if (!g.matrix.is_unitary()) {
      throw InvalidParams("gate '" + g.label +
                          "' is not unitary; sequences take unitaries only");
    }
  }
}

const Gate& GateSequence::gate(std::size_t i) const {
  if (i >= gates_.size()) {
    throw IndexOutOfRange("gate index " + std::to_string(i) +
                          " in a sequence of " + std::to_string(gates_.size()));
  }
  return gates_[i];
}

SubSequencePartition make_partition(const GateSequence& seq,
                                    PartitionMode mode) {
  SubSequencePartition p;
  const int m = static_cast<int>(seq.size());
  if (m == 0) return p;
  if (mode == PartitionMode::Whole) {
    p.groups.push_back(Group{0, m - 1});
  } else {
    p.groups.reserve(m);
    for (int i = 0; i < m; ++i) p.groups.push_back(Group{i, 0});
  }
  return p;
}

SubSequencePartition make_partition(const GateSequence& seq,
                                    std::vector<Group> groups) {
  const int m = static_cast<int>(seq.size());
  int expected_start = 0;
  for (const auto& g : groups) {
    if (g.span < 0 || g.start < 0) {
      throw InvalidPartition("group (" + std::to_string(g.start) + ":" +
                             std::to_string(g.span) +
                             ") has a negative field");
    }
    if (g.start != expected_start) {
      throw InvalidPartition("group starting at " + std::to_string(g.start) +
                             " leaves a gap or overlap; expected start " +
                             std::to_string(expected_start));
    }
    expected_start = g.start + g.span + 1;
  }
  if (expected_start != m) {
    throw InvalidPartition("groups cover gates [0, " +
                           std::to_string(expected_start) + ") but the "
                           "sequence has " + std::to_string(m) + " gates");
  }
  return SubSequencePartition{std::move(groups)};
}

GateMatrix group_matrix(const GateSequence& seq, const Group& group) {
  if (group.start < 0 || group.span < 0 ||
      std::size_t(group.start + group.span) >= seq.size()) {
    throw InvalidPartition("group (" + std::to_string(group.start) + ":" +
                           std::to_string(group.span) +
                           ") does not fit a sequence of " +
                           std::to_string(seq.size()) + " gates");
  }
  Matrix m = seq.gate(group.start).matrix.entries();
  for (int i = group.start + 1; i <= group.start + group.span; ++i) {
    m = seq.gate(i).matrix.entries() * m;
  }
  return GateMatrix(seq.n_qubits(), std::move(m), /*unitary=*/true);
}

Vector simulate(const GateSequence& seq, const StateVector& initial) {
  if (seq.n_qubits() != initial.n_qubits()) {
    throw DimensionMismatch("initial state width does not match sequence");
  }
  Vector v = initial.amplitudes();
  for (const auto& g : seq.gates()) v = g.matrix.entries() * v;
  return v;
}

namespace {

std::string group_label(const GateSequence& seq, const Group& g) {
  std::string label = seq.gate(g.start).label;
  for (int i = g.start + 1; i <= g.start + g.span; ++i) {
    label += " ; ";
    label += seq.gate(i).label;
  }
  return label;
}

struct Node {
  Complex amplitude;
  StateVector state;
  std::string path;
};

// What one node turns into at the next level. Kept per-node so multi-threaded
// expansion can stitch results back together in frontier order.
struct Expansion {
  AVTerms split;
};

}  // namespace

DecompositionResult decompose(const GateSequence& seq,
                              const SubSequencePartition& partition,
                              const StateVector& initial, double prune_tol,
                              int threads, const Tolerances& tol) {
  if (seq.n_qubits() != initial.n_qubits()) {
    throw DimensionMismatch("initial state width does not match sequence");
  }
  if (prune_tol < 0.0 || !std::isfinite(prune_tol)) {
    throw InvalidParams("prune_tol must be a finite non-negative number");
  }
  if (threads < 1) throw InvalidParams("threads must be at least 1");
  // Partitions built by make_partition are always valid; re-validate here so
  // hand-rolled ones cannot walk off the sequence.
  make_partition(seq, partition.groups);

  DecompositionResult result;
  result.n_groups = static_cast<int>(partition.groups.size());

  std::vector<Node> frontier;
  frontier.push_back(Node{Complex(1.0, 0.0), initial, ""});

  for (const auto& group : partition.groups) {
    const GateMatrix gm = group_matrix(seq, group);
    const std::string label = group_label(seq, group);

    std::vector<Expansion> expansions(frontier.size(),
                                      Expansion{AVTerms{{}, 0.0, {}, initial}});
    auto expand_range = [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        expansions[i].split = av_decompose(gm, frontier[i].state, tol);
      }
    };
    if (threads == 1 || frontier.size() < 2) {
      expand_range(0, frontier.size());
    } else {
      const std::size_t workers =
          std::min<std::size_t>(threads, frontier.size());
      const std::size_t chunk = (frontier.size() + workers - 1) / workers;
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(begin + chunk, frontier.size());
        if (begin < end) pool.emplace_back(expand_range, begin, end);
      }
      for (auto& t : pool) t.join();
    }

    std::vector<Node> next;
    next.reserve(frontier.size() * 2);
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      const Node& node = frontier[i];
      const AVTerms& split = expansions[i].split;

      const Complex e_amp = node.amplitude * split.expectation;
      if (std::abs(e_amp) > prune_tol) {
        next.push_back(Node{e_amp, node.state, node.path + "E"});
        result.factors.push_back(
            FactorRecord{label, 'E', split.expectation, node.path + "E"});
      } else {
        ++result.pruned_count;
      }

      const Complex o_amp = node.amplitude * split.uncertainty;
      if (split.orthogonal_state.has_value() && std::abs(o_amp) > prune_tol) {
        next.push_back(
            Node{o_amp, *split.orthogonal_state, node.path + "O"});
        result.factors.push_back(FactorRecord{
            label, 'O', Complex(split.uncertainty, 0.0), node.path + "O"});
      } else {
        ++result.pruned_count;
      }
    }
    frontier = std::move(next);
  }

  result.leaves.reserve(frontier.size());
  for (auto& node : frontier) {
    result.leaves.push_back(
        DecompositionLeaf{node.amplitude, std::move(node.state),
                          std::move(node.path)});
  }
  // Expansion order already yields lexicographic paths (E before O at every
  // branch); sort anyway so the contract never depends on that detail.
  std::sort(result.leaves.begin(), result.leaves.end(),
            [](const DecompositionLeaf& a, const DecompositionLeaf& b) {
              return a.path < b.path;
            });

  const Vector direct = simulate(seq, initial);
  Vector recon = Vector::Zero(direct.size());
  for (const auto& leaf : result.leaves) {
    recon += leaf.amplitude * leaf.state.amplitudes();
  }
  result.reconstruction_residual = (recon - direct).cwiseAbs().maxCoeff();
  return result;
}

std::pair<std::optional<StateVector>, double> orthogonal_chain(
    const StateVector& prev, const GateMatrix& g, const Tolerances& tol) {
  AVTerms split = av_decompose(g, prev, tol);
  return {std::move(split.orthogonal_state), split.uncertainty};
}

Vector amplitudes_in_computational_basis(const DecompositionResult& result) {
  if (result.leaves.empty()) {
    throw InvalidParams(
        "amplitudes_in_computational_basis needs at least one leaf");
  }
  Vector acc = Vector::Zero(result.leaves.front().state.dim());
  for (const auto& leaf : result.leaves) {
    acc += leaf.amplitude * leaf.state.amplitudes();
  }
  return acc;
}

std::vector<FactorRecord> factor_report(const DecompositionResult& result) {
  return result.factors;
}

GeneralizedTerms rebase(const GateSequence& seq, const StateVector& initial,
                        const StateVector& phi, const GateMatrix& k, double q,
                        const Tolerances& tol) {
  const auto dim = Eigen::Index(1) << seq.n_qubits();
  Matrix total = Matrix::Identity(dim, dim);
  for (const auto& g : seq.gates()) total = g.matrix.entries() * total;
  // The total product is unitary but may have drifted at machine scale;
  // construct without the strict check and let the split see it as-is.
  GateMatrix a(seq.n_qubits(), std::move(total), /*unitary=*/false);
  return generalized_decompose(a, initial, phi, k, q, tol);
}

DecompositionResult collapse_equal_leaves(const DecompositionResult& result,
                                          double tol) {
  DecompositionResult out;
  out.n_groups = result.n_groups;
  out.factors = result.factors;
  out.pruned_count = result.pruned_count;
  out.reconstruction_residual = result.reconstruction_residual;
  for (const auto& leaf : result.leaves) {
    bool merged = false;
    for (auto& kept : out.leaves) {
      if (inner(kept.state, leaf.state).real() >= 1.0 - tol) {
        kept.amplitude += leaf.amplitude;
        merged = true;
        break;
      }
    }
    if (!merged) out.leaves.push_back(leaf);
  }
  return out;
}

}  // namespace avq
