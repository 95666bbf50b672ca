#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace hgmix {

// One Swedish-data line item. Factor levels are 1-based; payment is stored
// but never modeled.
struct RiskRecord {
  int kilometres = 1;  // 1..5
  int zone = 1;        // 1..7
  int bonus = 1;       // 1..7
  int make = 1;        // 1..9
  double exposure = 0.0;
  long claims = 0;
  double payment = 0.0;
};

void validate_record(const RiskRecord& r, long line_no);

struct DesignMatrix {
  Eigen::MatrixXd X;       // intercept + treatment indicators, 25 columns
  Eigen::VectorXd offset;  // ln(exposure)
  Eigen::VectorXd y;       // claims
  std::vector<std::string> names;
};

// Treatment coding with level 1 of each factor as the baseline; column order
// intercept, KILO2-5, ZONE2-7, BONUS2-7, MAKE2-9.
DesignMatrix encode_design(const std::vector<RiskRecord>& records);

struct GLMFit {
  std::string family;  // "Poisson" or "NegativeBinomial"
  std::vector<std::string> coef_names;
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  Eigen::VectorXd z;
  std::optional<double> r_hat;  // Model II only
  std::optional<double> r_se;
  std::optional<double> r_z;
  double log_likelihood = 0.0;
  double deviance = 0.0;
  long df = 0;
  double deviance_p = 0.0;
  Eigen::VectorXd mu;  // fitted means
  bool poisson_equivalent = false;  // NB fit with r diverging
};

// Model I: IRLS to relative deviance change < 1e-10.
GLMFit fit_poisson(const std::vector<RiskRecord>& records);

// Model II: NB with variance mu + mu^2/r; alternates IRLS for beta with
// Newton steps for r on the profile likelihood.
GLMFit fit_negbin(const std::vector<RiskRecord>& records);

struct MixingSample {
  enum class Kind { lambda, p };
  Kind kind = Kind::lambda;
  std::vector<double> values;
  std::optional<double> r_hat;
};

MixingSample derive_mixing_sample(const GLMFit& fit, MixingSample::Kind kind);

struct SubsetResult {
  std::string family;
  std::string subset;  // e.g. "KILO+ZONE+BONUS+MAKE" or "1" for intercept-only
  double aic = 0.0;
  double bic = 0.0;
};

// All 16 variable subsets (including intercept-only) for one family.
std::vector<SubsetResult> subset_search(const std::vector<RiskRecord>& records,
                                        const std::string& family);

}  // namespace hgmix
