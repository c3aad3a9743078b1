// narratopo - topic-trajectory analytics over interview transcript corpora.
//
// Subcommands mirror the pipeline stages; `run` chains them with
// stage-level resumption. Exit codes: 0 success, 1 input/config error,
// 2 internal error.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "narratopo/config.hpp"
#include "narratopo/errors.hpp"
#include "narratopo/pipeline.hpp"

namespace fs = std::filesystem;
using namespace ntp;

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "flat key=value config file");
    cmd->add_option("--set", args.overrides, "override a config key (key=value), repeatable");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"topic-trajectory analytics for interview transcript corpora"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string synth_spec;
    bool drop_questions = false;

    CLI::App* ingest = app.add_subcommand("ingest", "parse and normalize the corpus into sections");
    CLI::App* fit = app.add_subcommand("fit", "embed sections and fit the topic model");
    CLI::App* align = app.add_subcommand("align", "build narrative matrices and group schemas");
    CLI::App* compare = app.add_subcommand("compare", "per-cell group t-tests and characteristic sets");
    CLI::App* diverge = app.add_subcommand("diverge", "score and rank divergent testimonies");
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus from a planted spec");
    CLI::App* report = app.add_subcommand("report", "emit summary and plot-data tables");
    CLI::App* validate = app.add_subcommand("validate", "schema-check every artifact in the output dir");
    CLI::App* run = app.add_subcommand("run", "run the full pipeline (resumable)");
    for (CLI::App* cmd : {ingest, fit, align, compare, diverge, synth, report, validate, run}) {
        add_common(cmd, args);
    }
    synth->add_option("--spec", synth_spec, "planted corpus spec (JSON)")->required();
    for (CLI::App* cmd : {ingest, run}) {
        cmd->add_flag("--drop-questions", drop_questions,
                      "embed answers only (interviewer text excluded from section text)");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        std::vector<std::string> overrides = args.overrides;
        if (drop_questions) overrides.push_back("ingest.drop_questions=true");
        const RunConfig cfg = args.config_path.empty()
                                  ? config_from_overrides(overrides)
                                  : load_config(args.config_path, overrides);
        fs::create_directories(cfg.output_path);
        if (ingest->parsed()) {
            pipeline::ingest_stage(cfg);
        } else if (fit->parsed()) {
            pipeline::fit_stage(cfg);
        } else if (align->parsed()) {
            pipeline::align_stage(cfg);
        } else if (compare->parsed()) {
            pipeline::compare_stage(cfg);
        } else if (diverge->parsed()) {
            pipeline::diverge_stage(cfg);
        } else if (synth->parsed()) {
            pipeline::synth_stage(cfg, synth_spec);
        } else if (report->parsed()) {
            pipeline::report_stage(cfg);
        } else if (validate->parsed()) {
            auto problems = pipeline::validate_outputs(cfg);
            for (const std::string& p : problems) std::cerr << "invalid: " << p << "\n";
            if (!problems.empty()) return 1;
            std::cout << "all artifacts valid\n";
        } else if (run->parsed()) {
            pipeline::run_all(cfg);
        }
        return 0;
    } catch (const UserError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
