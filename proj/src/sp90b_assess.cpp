#include <algorithm>
#include <string>

#include "entropy_forge/error.hpp"
#include "entropy_forge/rng.hpp"
#include "entropy_forge/sp90b.hpp"

namespace ef::sp90b {

IidResult iid_tests(const Dataset& data, const PermutationOptions& options) {
  validate(data);
  IidResult out;
  out.chi_square = chi_square_tests(data);
  out.permutation = permutation_test_suite(data, options);
  out.verdict = std::all_of(out.permutation.begin(), out.permutation.end(),
                            [](const PermutationTestOutcome& o) { return o.pass; }) &&
                std::all_of(out.chi_square.begin(), out.chi_square.end(),
                            [](const ChiSquareOutcome& o) { return o.pass; });
  return out;
}

AssessmentReport assess(const Dataset& data, const std::optional<RestartMatrix>& restart,
                        const AssessmentOptions& options) {
  validate(data);
  AssessmentReport report;
  report.n = data.n;
  report.samples = data.samples.size();
  report.seed = options.permutation.seed;
  report.permutations = options.permutation.permutations;

  auto flag = [&](std::string what) {
    if (options.strict) throw InsufficientDataError("non-conformant: " + what);
    report.conformance_flags.push_back(std::move(what));
  };
  if (data.samples.size() < kSequentialSamples) {
    flag("sequential dataset has " + std::to_string(data.samples.size()) + " samples, fewer than " +
         std::to_string(kSequentialSamples));
  }
  if (options.permutation.permutations < kPermutations) {
    flag("permutation count " + std::to_string(options.permutation.permutations) + " below " +
         std::to_string(kPermutations));
  }
  if (restart && (restart->rows != kRestartDim || restart->cols != kRestartDim)) {
    flag("restart matrix is " + std::to_string(restart->rows) + " x " + std::to_string(restart->cols) +
         ", not " + std::to_string(kRestartDim) + " x " + std::to_string(kRestartDim));
  }
  if (restart && restart->n != data.n) {
    throw ParameterError("restart matrix symbol width differs from the sequential dataset");
  }

  report.sequential = iid_tests(data, options.permutation);
  report.iid_verdict = report.sequential.verdict;
  report.sequential_entropy = min_entropy(data);
  report.h_symbol = report.sequential_entropy.h_symbol;
  report.h_bitstring = report.sequential_entropy.h_bitstring;
  report.min_entropy = report.sequential_entropy.min_entropy;

  bool restart_ok = true;
  if (restart) {
    if (report.min_entropy <= 0.0) {
      report.conformance_flags.push_back("restart tests skipped: sequential min-entropy is zero");
      restart_ok = false;
    } else {
      report.restart = restart_tests(*restart, report.min_entropy);
      report.min_entropy = std::min({report.min_entropy, report.restart->rows.min_entropy,
                                     report.restart->cols.min_entropy});
      restart_ok = report.restart->sanity_pass && report.restart->validation_pass;
      if (options.run_restart_iid) {
        PermutationOptions rows_opts = options.permutation;
        rows_opts.seed = derive_seed(options.permutation.seed, 0x726f7773);  // "rows"
        PermutationOptions cols_opts = options.permutation;
        cols_opts.seed = derive_seed(options.permutation.seed, 0x636f6c73);  // "cols"
        report.restart_rows_iid = iid_tests(restart->row_dataset(), rows_opts);
        report.restart_cols_iid = iid_tests(restart->column_dataset(), cols_opts);
        report.iid_verdict = report.iid_verdict && report.restart_rows_iid->verdict &&
                             report.restart_cols_iid->verdict;
      }
    }
  }

  if (!report.iid_verdict) {
    report.status = "assessment incomplete";
  } else if (!restart_ok) {
    report.status = "restart failed";
  } else {
    report.status = "complete";
  }
  return report;
}

}  // namespace ef::sp90b
