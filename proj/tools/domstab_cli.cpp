#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "domstab/report.hpp"

using namespace domstab;

namespace {

struct Flags {
    std::string input;
    std::string out = "out";
    Count min_total_reads = 10;
    std::string id_rule = "_:MMDDYY";
    std::string format = "auto";
    std::vector<std::string> models;
    double r2_min = 0.30;
    double se_ratio_max = 20.0;
    double mag_max = 1e6;
    std::uint64_t seed = 20170101;
    bool plot = false;
    bool normalize = false;
    bool serial = false;
    std::string subject;
    double d0 = 0;
    std::size_t steps = 200;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--input", f.input, "abundance table (species x samples, CSV or TSV)")->required();
    cmd->add_option("--out", f.out, "output directory")->capture_default_str();
    cmd->add_option("--min-total-reads", f.min_total_reads, "drop species with fewer total reads per subject")
        ->capture_default_str();
    cmd->add_option("--id-rule", f.id_rule, "sample id rule '<sep>:<MMDDYY|YYMMDD|YYYYMMDD|none>'")
        ->capture_default_str();
    cmd->add_option("--format", f.format, "auto, csv or tsv")->capture_default_str();
    cmd->add_option("--models", f.models, "model kinds: linear logistic logistic-sine lq qq")->delimiter(',');
    cmd->add_option("--r2-min", f.r2_min)->capture_default_str();
    cmd->add_option("--se-ratio-max", f.se_ratio_max, "largest accepted SE/|param|")->capture_default_str();
    cmd->add_option("--mag-max", f.mag_max, "largest accepted |param|")->capture_default_str();
    cmd->add_option("--seed", f.seed, "recorded in run_info.csv")->capture_default_str();
    cmd->add_flag("--plot", f.plot, "write SVG plots");
    cmd->add_flag("--normalize", f.normalize, "use relative abundances instead of reads");
    cmd->add_flag("--serial", f.serial, "process subjects one at a time");
}

RunConfig to_config(const Flags& f) {
    RunConfig c;
    c.input = f.input;
    c.out_dir = f.out;
    c.min_total_reads = f.min_total_reads;
    c.id_rule = SampleIdRule::parse(f.id_rule);
    if (f.format == "csv") c.format = TableFormat::Comma;
    else if (f.format == "tsv") c.format = TableFormat::Tab;
    else if (f.format != "auto") throw InputError("unknown format '" + f.format + "'");
    if (!f.models.empty()) {
        c.models.clear();
        for (const auto& m : f.models) c.models.push_back(parse_kind(m));
    }
    c.policy = {f.r2_min, f.se_ratio_max, f.mag_max};
    c.seed = f.seed;
    c.plot = f.plot;
    c.relative = f.normalize;
    c.parallel = !f.serial;
    if (!f.subject.empty()) c.subject = f.subject;
    if (f.d0 > 0) c.initial = f.d0;
    c.steps = f.steps;
    return c;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dominance metrics and dominance-stability models for species abundance time series"};
    app.require_subcommand(1);
    Flags flags;

    const std::pair<const char*, Command> commands[] = {
        {"metrics", Command::Metrics},   {"compare-indices", Command::CompareIndices},
        {"fit", Command::Fit},           {"select", Command::Select},
        {"simulate", Command::Simulate}, {"report-all", Command::ReportAll},
    };
    const char* help[] = {"per-sample D_c, D_sd and D_s", "D_c regressed on classic diversity indices",
                          "fit every model kind per subject", "fit and select one model per subject",
                          "iterate the fitted dominance map", "run everything and write plots"};
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < std::size(commands); ++i) {
        auto* sub = app.add_subcommand(commands[i].first, help[i]);
        add_common(sub, flags);
        subs.push_back(sub);
    }
    auto* sim = subs[4];
    sim->add_option("--subject", flags.subject, "subject id")->required();
    sim->add_option("--d0", flags.d0, "initial dominance (default: first observed D_c)");
    sim->add_option("--steps", flags.steps)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    Command cmd = Command::ReportAll;
    for (std::size_t i = 0; i < subs.size(); ++i)
        if (subs[i]->parsed()) cmd = commands[i].second;

    CommandResult result;
    try {
        result = run_command(cmd, to_config(flags));
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    for (const auto& m : result.messages) std::cerr << (result.exit_code ? "error: " : "") << m << '\n';
    for (const auto& f : result.files) std::cout << f.string() << '\n';
    return result.exit_code;
}
