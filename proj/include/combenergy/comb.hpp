// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <random>

#include "combenergy/tensor.hpp"

namespace combenergy {

enum class BatteryModel { global, local };

/// One tooth of a comb: input space id (nullopt = trivial space) and output
/// space id.
struct CombStep {
  std::optional<std::string> input;
  std::string output;
};

/// Quantum comb: Choi operator plus step structure. The operator lives on all
/// step spaces (trivial inputs are not materialized).
struct Comb {
  LabeledOperator op;
  std::vector<CombStep> steps;

  int n_steps() const { return static_cast<int>(steps.size()); }
  std::vector<std::string> input_ids() const;   // non-trivial, step order
  std::vector<std::string> output_ids() const;  // step order
  long input_dim_product() const;
};

struct ValidityReport {
  std::vector<double> level_residuals;  // Frobenius, level N down to 1
  double psd_margin = 0.0;              // lambda_min(op)
  double tol = 0.0;
  bool valid = false;
};

/// Checks the recursive causality conditions level by level plus positive
/// semidefiniteness. Residual at level n is ||Tr_out_n[C^(n)] - C^(n-1) (x) I||_F.
ValidityReport validate_comb(const Comb& c, double tol = 1e-8);

/// Link product over the shared label ids:
///   A * B = Tr_shared[(A^{T_shared} (x) I)(I (x) B)], on the symmetric
/// difference of the label sets. Dims must agree on shared labels.
LabeledOperator link(const LabeledOperator& a, const LabeledOperator& b);

/// Sequential concatenation: wires output n of `a` to input n of `b`
/// (dims must match per step). Result is a comb with a's inputs and b's
/// outputs.
Comb compose(const Comb& a, const Comb& b);

struct EnergyAudit {
  std::vector<double> per_step_local;     // max(lambda_max(O'_n), 0)
  std::vector<double> per_prefix_global;  // lambda_max(O_n)
  double e_local = 0.0;
  double e_global = 0.0;
};

EnergyAudit energy_audit(const Comb& c);
double energy_global(const Comb& c);
double energy_local(const Comb& c);
bool is_energy_constrained(const Comb& c, double e, BatteryModel model);

/// The prefix operator O_n (prefix = true) or the per-step operator O'_n
/// (prefix = false) on the comb's non-trivial input spaces, in canonical
/// label order. n is 1-based.
LabeledOperator energy_operator(const Comb& c, int n, bool prefix);

/// Random valid comb built from Haar-random step isometries with memory.
/// step_dims[n] = (input dim, output dim); memory_dims[n] = memory dim after
/// step n (memory_dims.back() bounds the Choi rank). Space ids are
/// prefix + "0", prefix + "1", ... in wire order (inputs even, outputs odd),
/// all with zero-ground `number` Hamiltonians unless degenerate = true.
Comb random_comb(std::mt19937_64& rng, const std::vector<std::pair<int, int>>& step_dims,
                 const std::vector<int>& memory_dims, const std::string& prefix,
                 bool degenerate_hamiltonians = false);

/// Haar-random isometry with cols columns embedded in dimension rows.
Matrix random_isometry(std::mt19937_64& rng, int rows, int cols);

/// Haar-random pure state.
CVector random_state(std::mt19937_64& rng, int dim);

}  // namespace combenergy
