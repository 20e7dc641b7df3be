// Prints thresholds, spectral efficiency and average BER of the adaptive
// scheme at a few operating points.

#include <cstdio>

#include "fsoam/adaptation.hpp"

int main() {
    using namespace fsoam;
    const TurbulenceParams turbulence(0.3);
    const MimoConfig mimo(0.3, 2, 2);

    for (double snr_db : {5.0, 10.0, 15.0, 20.0, 25.0}) {
        const AdaptiveScheme scheme = compute_boundaries(5, 1e-3, LinkBudget::from_db(snr_db));
        const auto ber = average_ber_adaptive(scheme, turbulence);
        std::printf("%5.1f dB  I_1=%.4f  S=%.4f  S(2x2)=%.4f  BER=%.3e\n", snr_db, scheme.boundary(1),
                    spectral_efficiency(scheme, turbulence), spectral_efficiency(scheme, mimo),
                    ber.value_or(0.0));
    }
}
