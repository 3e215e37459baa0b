#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hornpoc/diagnostic.hpp"
#include "hornpoc/model.hpp"

namespace hornpoc {

struct DerivationNode {
  std::size_t id = 0;  // pre-order position in the tree
  std::size_t clause_index = 0;
  Clause clause;
  Substitution sub;  // closed on every variable of the clause
  Fact conclusion_label;
  std::vector<Fact> premise_labels;  // predicate hypotheses, clause order
  std::vector<std::shared_ptr<const DerivationNode>> children;
};

struct DerivationTree {
  Fact root_fact;
  std::shared_ptr<const DerivationNode> subroot;

  /// Leaves have depth 1.
  int depth() const;
  std::size_t size() const;
};

/// Children before parents, children left to right.
std::vector<const DerivationNode*> post_order(const DerivationTree& t);

struct SearchBudget {
  int max_depth = 12;  // on tree depth
  std::size_t max_nodes = 100000;
  std::chrono::milliseconds timeout{300000};
  /// Facts whose terms are deeper than this never appear in a derivation.
  std::optional<std::uint32_t> max_term_depth;
};

enum class DeriveStatus { Found, NotFound, BudgetExhausted };

struct DeriveStats {
  std::size_t nodes = 0;  // successful clause-conclusion unifications
  int depth_reached = 0;  // last completed iterative-deepening bound
  std::chrono::milliseconds elapsed{0};
};

struct DeriveResult {
  DeriveStatus status = DeriveStatus::NotFound;
  std::optional<DerivationTree> tree;
  DeriveStats stats;
  std::vector<Diagnostic> warnings;
  std::string exhausted;  // which bound was hit

  bool found() const { return status == DeriveStatus::Found; }
};

/// Backward chaining with iterative deepening on tree depth. Answers are
/// tabled per (goal variant, remaining depth). Clauses are tried in order;
/// the next premise solved is the leftmost ground one, else the leftmost.
DeriveResult derive(const Model& m, const Query& q, const SearchBudget& budget = {});

/// Re-verifies every node: clause membership, closed labels, local
/// subsumption witnessed by `sub`, disequalities. Empty means valid.
std::vector<Diagnostic> check_tree(const Model& m, const DerivationTree& t);

/// Deterministic text form: node id, clause label, substitution, edge labels.
std::string dump_tree(const DerivationTree& t);

}  // namespace hornpoc
