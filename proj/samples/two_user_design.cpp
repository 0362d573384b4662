// Compares the statistical beamformer designs for one two-user pair across
// SNR, using the exact ergodic rates.

#include <cstdio>
#include <vector>

#include "statbeam/statbeam.hpp"

int main() {
  using namespace statbeam;

  const std::vector<CovarianceMatrix> sigmas{steered_exponential_correlation(2, 0.7, 1.0, 0.3),
                                             steered_exponential_correlation(2, 0.5, 1.5, 2.2)};

  const DesignResult low = design_low_snr(sigmas);
  const DesignResult high = design_high_snr_m2(sigmas[0], sigmas[1]);
  std::printf("high-SNR asymptote of the generalized-eigenvector design: %.6f nats\n", high.objective);

  std::printf("%8s %12s %12s %12s %12s\n", "snr_db", "identity", "low-snr", "high-snr", "fixed-point");
  for (double snr_db = -20.0; snr_db <= 40.0; snr_db += 10.0) {
    const double rho = snr_db_to_rho(snr_db);
    const DesignResult fp = fixed_point_design(sigmas, rho);
    std::printf("%8.1f %12.6f %12.6f %12.6f %12.6f\n", snr_db,
                closed_form_rates(sigmas, BeamformerSet::standard_basis(2), rho).sum,
                closed_form_rates(sigmas, low.ws, rho).sum, closed_form_rates(sigmas, high.ws, rho).sum,
                closed_form_rates(sigmas, fp.ws, rho).sum);
  }

  GridOracleOptions options;
  options.resolution = 48;
  const DesignResult oracle = grid_search_oracle_m2(sigmas[0], sigmas[1], options);
  std::printf("grid oracle, high-SNR asymptote: %.6f nats\n", oracle.objective);
  return 0;
}
