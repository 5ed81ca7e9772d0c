// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "combenergy/comb.hpp"
#include "combenergy/conic.hpp"

namespace combenergy {

/// Space layout of an N-step probe comb with a trivial first input:
/// Comb[(0, s1), (s2, s3), ..., (s_{2N-2}, s_{2N-1})]. The final space
/// s_{2N-1} is measured in its energy eigenbasis; outcome x picks energy
/// level x.
struct ProbeStructure {
  std::vector<SpaceLabel> spaces;  // s1 .. s_{2N-1}, odd count

  int n_steps() const { return static_cast<int>(spaces.size() + 1) / 2; }
  const SpaceLabel& final_space() const { return spaces.back(); }
  int n_outcomes() const { return final_space().dim; }
  // dims of the instrument-element space (everything but the final space)
  std::vector<int> element_dims() const;

  /// Two-step layout for single-channel estimation in dimension d with the
  /// equal-spaced number Hamiltonian on every space.
  static ProbeStructure single_channel(int d);
};

/// Conic program for the energy-constrained probe optimization
///   max sum_x Re[e^{i phases[x]} Tr[T_x J]]
/// over instruments {T_x} whose assembled comb sum_x T_x (x) |x><x| obeys the
/// causality conditions and the chosen battery constraint at budget E.
struct ProbeProgram {
  ConicProblem problem;
  std::vector<int> instrument_vars;  // per outcome (empty when diagonal_final = false)
  int full_var = -1;                 // the single T when diagonal_final = false
  int n_outcomes = 0;
  std::vector<int> level_vars;       // T^{(n)}, n = 1 .. N-1
  std::vector<int> allocation_vars;  // local battery step budgets
};

ProbeProgram build_probe_program(const ProbeStructure& structure, const LabeledOperator& task_op,
                                 BatteryModel battery, double energy,
                                 const std::vector<double>& phases, bool diagonal_final = true);

/// Instrument elements out of a solved probe program.
std::vector<Matrix> extract_instrument(const ProbeProgram& prog, const SolveReport& report);

/// Assembles sum_x T_x (x) |x><x| into a comb over the structure's spaces.
Comb assemble_probe_comb(const ProbeStructure& structure, const std::vector<Matrix>& instrument);

namespace program_detail {

/// Sum of the listed Hamiltonians embedded on the factor layout `dims`.
Matrix embedded_hamiltonian_sum(const std::vector<int>& dims,
                                const std::vector<std::pair<int, const Matrix*>>& hs);

/// X -> Tr_{out_positions}[(h_embedded) X] as a superoperator.
SuperOp energy_trace_map(const std::vector<int>& dims, const std::vector<int>& out_positions,
                         const Matrix& h_embedded);

/// Scalar variable -> m: maps a 1x1 variable to the fixed matrix.
SuperOp so_scalar_times(const Matrix& m);

}  // namespace program_detail

}  // namespace combenergy
