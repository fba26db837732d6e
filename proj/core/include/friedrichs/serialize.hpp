#pragma once

#include <string>

#include "friedrichs/eigensolver.hpp"
#include "friedrichs/resonant.hpp"
#include "friedrichs/verify.hpp"

namespace friedrichs {

/// {"dim", "cells", "domain", "values"}; doubles round-trip exactly.
std::string to_json(const GridFunction& u, int indent = -1);
GridFunction grid_function_from_json(const std::string& text);

std::string to_json(const SolverDiagnostics& d, int indent = -1);
/// lambda1, exponents, normalization, diagnostics and phi1.
std::string to_json(const EigenPair& pair, const Exponents& exps, int indent = -1);
EigenPair eigen_pair_from_json(const std::string& text);

/// Summary plus per-sample rows.
std::string to_json(const DeficitReport& report, int indent = -1);
/// Header then one row per sample:
/// schema_version,index,seed,style,cone,lhs,rhs,ratio,excluded,t
std::string to_csv(const DeficitReport& report);

std::string to_json(const ResonantSolution& s, const ResonantProblem& problem, int indent = -1);

/// printf("%.17g").
std::string format_double(double x);

}  // namespace friedrichs
