#pragma once

#include <cstdint>
#include <random>

#include "qra/core.hpp"
#include "qra/ingest.hpp"

namespace qra {

/// Seeded generator with a platform-stable normal sampler (Box-Muller over
/// mt19937_64; std::normal_distribution is not bit-stable across standard
/// libraries).
class DeterministicRng {
  public:
    explicit DeterministicRng(std::uint64_t seed) : engine_(seed) {}

    double uniform() {  // (0, 1)
        return (static_cast<double>(engine_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

  private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

struct SyntheticData {
    PointForecastMatrix point_forecasts;
    HourlyTimeSeries actual;
};

/// Linear-Gaussian benchmark: a smooth deterministic signal x_t (daily and
/// weekly shape plus slow drift) observed as y_t = x_t + eps, eps ~ N(0, 1).
/// Forecaster columns are x_t plus, for m > 1, noisier copies of it.
SyntheticData linear_gaussian_data(int days, std::uint64_t seed, int forecasters = 1,
                                   CivilDate first_day = CivilDate{2015, 1, 1});

/// Demo market panel: spiky price process plus a load forecast, for seeded
/// end-to-end runs without network access.
MarketPanel synthetic_panel(int days, std::uint64_t seed,
                            CivilDate first_day = CivilDate{2015, 1, 1});

}  // namespace qra
