// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "egtsyn/gradcheck.hpp"
#include "egtsyn/model.hpp"

namespace egtsyn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

/// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

/// The synthetic input pair used by `gradcheck`.
inline constexpr const char* kGradcheckDrugA = "CC(=O)Nc1ccccc1";
inline constexpr const char* kGradcheckDrugB = "OCC#N";
inline constexpr std::size_t kGradcheckCellWidth = 6;

/// Gradient check of a whole tiny-width variant on the synthetic pair,
/// both orders, dropout off, penalty included.
GradCheckReport variant_gradcheck(model::Variant variant, std::uint64_t seed, double tolerance);

}  // namespace egtsyn::cli
