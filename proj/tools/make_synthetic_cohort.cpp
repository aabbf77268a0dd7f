// Writes a deterministic synthetic read-count table: 5 subjects x 30 samples x
// 60 species. Each subject's community dominance follows a noisy dominance map
// D(t+1) = D(t) (1 + a + b D(t)); the counts are built so that one dominant
// species carries whatever share gives the target D_c.
//
//   make_synthetic_cohort [--seed N] [output.csv]

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

namespace {

constexpr int kSubjects = 5;
constexpr int kSamples = 30;
constexpr int kSpecies = 60;
constexpr int kCommon = 45; // species 45..54 are rare, 55..59 never observed
constexpr int kRareEnd = 55;

std::string date_token(int sample) {
    // twice weekly starting Jan 1 2006, MMDDYY
    static const int month_days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int day = 1 + sample * 7 / 2, month = 0;
    while (day > month_days[month]) day -= month_days[month++];
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02d%02d06", month + 1, day);
    return buf;
}

} // namespace

int main(int argc, char** argv) {
    std::uint64_t seed = 20170101;
    std::string path;
    CLI::App app{"Writes a deterministic 5-subject abundance table (stdout when no path is given)"};
    app.add_option("--seed", seed, "generator seed")->capture_default_str();
    app.add_option("output", path, "output CSV path");
    CLI11_PARSE(app, argc, argv);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<std::string> sample_ids;
    std::vector<std::vector<long long>> counts(kSpecies);

    for (int s = 0; s < kSubjects; ++s) {
        const std::string subject = std::to_string(501 + s);
        // background weights of the non-dominant common species
        std::vector<double> w(kCommon);
        for (auto& x : w) x = std::exp(0.7 * gauss(rng));
        const int dominant = static_cast<int>(unit(rng) * kCommon);
        w[dominant] = 0;
        double total = 0;
        for (double x : w) total += x;
        double sw = 0;
        for (auto& x : w) {
            x /= total;
            sw += x * x;
        }

        const double equilibrium = 15.0 + 5.0 * s;
        const double b = -(0.01 + 0.004 * s);
        const double a = -b * equilibrium;
        double D = equilibrium * (0.5 + unit(rng));

        for (int t = 0; t < kSamples; ++t) {
            sample_ids.push_back(subject + "_" + date_token(t));
            const double reads = std::floor(1500.0 + 3500.0 * unit(rng));
            // Solve q^2 + (1-q)^2 sw = simpson for the dominant share q.
            const double n = kCommon;
            const double simpson = std::clamp((D + n / reads) / n, sw + 1e-6, 0.95);
            const double q = (sw + std::sqrt(sw * sw - (1 + sw) * (sw - simpson))) / (1 + sw);
            for (int i = 0; i < kSpecies; ++i) {
                long long c = 0;
                if (i == dominant) c = std::llround(q * reads);
                else if (i < kCommon) c = std::llround((1 - q) * w[i] * reads);
                else if (i < kRareEnd) c = unit(rng) < 0.1 ? 1 : 0;
                counts[i].push_back(c);
            }
            const double S = a + b * D + 0.08 * gauss(rng);
            D = std::clamp(D * (1 + S), 3.0, 40.0);
        }
    }

    std::ofstream file;
    if (!path.empty()) file.open(path, std::ios::binary);
    std::ostream& out = path.empty() ? std::cout : file;
    out << "species";
    for (const auto& id : sample_ids) out << ',' << id;
    out << '\n';
    for (int i = 0; i < kSpecies; ++i) {
        char name[16];
        std::snprintf(name, sizeof name, "OTU%02d", i + 1);
        out << name;
        for (auto c : counts[i]) out << ',' << c;
        out << '\n';
    }
    return out ? 0 : 1;
}
