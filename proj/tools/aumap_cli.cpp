#include <csignal>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aumap/accuracy.hpp"
#include "aumap/bench.hpp"
#include "aumap/dataio.hpp"
#include "aumap/error.hpp"
#include "aumap/projector.hpp"
#include "aumap/stream.hpp"

namespace {

aumap::StreamServer* g_server = nullptr;

void stop_server(int) {
    if (g_server) g_server->stop();
}

struct GlobalFlags {
    std::uint64_t seed = 0;
    bool quiet = false;
};

void info(const GlobalFlags& g, const std::string& msg) {
    if (!g.quiet) std::cerr << msg << '\n';
}

// "-" sends CSV to standard output; anything else is an atomic file write.
void write_csv_output(const std::string& path, const std::string& text) {
    if (path == "-")
        std::cout << text;
    else
        aumap::write_text_atomic(path, text);
}

struct FitFlags {
    std::string inputs;
    std::string projections;
    std::size_t k = 15;
    double epsilon = 1e-12;
    std::string strategy = "kd_tree";

    void attach(CLI::App* cmd) {
        cmd->add_option("--inputs", inputs, "training inputs CSV (x columns)")->required();
        cmd->add_option("--projections", projections, "training projections CSV (u columns)")
            ->required();
        cmd->add_option("--k", k, "neighbor count")->capture_default_str();
        cmd->add_option("--epsilon", epsilon, "duplicate-distance threshold")
            ->capture_default_str();
        cmd->add_option("--strategy", strategy, "neighbor index strategy")
            ->check(CLI::IsMember({"kd_tree", "brute_force"}))
            ->capture_default_str();
    }

    aumap::Projector fit() const {
        aumap::ReferenceEmbedding embedding = aumap::load_embedding(inputs, projections);
        aumap::ProjectorConfig config;
        config.k = k;
        config.zero_distance_epsilon = epsilon;
        return aumap::Projector::fit(std::move(embedding), config,
                                     aumap::parse_strategy(strategy));
    }
};

void add_gen_data(CLI::App& app, GlobalFlags& g) {
    auto* cmd = app.add_subcommand("gen-data", "generate a multiclass Poisson mock dataset");
    cmd->fallthrough();
    auto spec = std::make_shared<aumap::PoissonSpec>();
    auto out = std::make_shared<std::string>();
    cmd->add_option("--classes", spec->class_count, "number of classes")->capture_default_str();
    cmd->add_option("--dim", spec->dim, "coordinates per sample")->capture_default_str();
    cmd->add_option("--per-class", spec->samples_per_class, "samples per class")
        ->capture_default_str();
    cmd->add_option("--rate-low", spec->rate_low, "lower Poisson rate bound")
        ->capture_default_str();
    cmd->add_option("--rate-high", spec->rate_high, "upper Poisson rate bound")
        ->capture_default_str();
    cmd->add_option("--out", *out, "output CSV path ('-' for stdout)")->required();
    cmd->callback([&g, spec, out] {
        spec->seed = g.seed;
        const aumap::LabeledDataset ds = aumap::generate_poisson(*spec);
        if (*out == "-")
            aumap::save_dataset(std::cout, ds);
        else
            aumap::save_dataset(*out, ds);
        info(g, "wrote " + std::to_string(ds.samples.rows()) + " samples of dimension " +
                    std::to_string(ds.samples.cols()));
    });
}

void add_project(CLI::App& app, GlobalFlags& g) {
    auto* cmd = app.add_subcommand("project", "project novel points onto a reference embedding");
    cmd->fallthrough();
    auto fit = std::make_shared<FitFlags>();
    auto points = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    fit->attach(cmd);
    cmd->add_option("--points", *points, "novel points CSV (x columns)")->required();
    cmd->add_option("--out", *out, "output projections CSV ('-' for stdout)")->required();
    cmd->callback([&g, fit, points, out] {
        const aumap::Projector projector = fit->fit();
        const aumap::Matrix xs = aumap::load_dataset(*points).samples;
        const aumap::Matrix us = projector.project_batch(xs);
        if (*out == "-")
            aumap::save_projections(std::cout, us);
        else
            aumap::save_projections(*out, us);
        info(g, "projected " + std::to_string(us.rows()) + " points");
    });
}

void add_serve(CLI::App& app, GlobalFlags& g) {
    auto* cmd = app.add_subcommand("serve", "project points arriving on a byte stream");
    cmd->fallthrough();
    auto fit = std::make_shared<FitFlags>();
    auto host = std::make_shared<std::string>("127.0.0.1");
    auto port = std::make_shared<std::uint16_t>(0);
    auto stdio = std::make_shared<bool>(false);
    fit->attach(cmd);
    cmd->add_option("--host", *host, "TCP listen address")->capture_default_str();
    auto* port_opt = cmd->add_option("--port", *port, "TCP port (0 for ephemeral)");
    auto* stdio_opt = cmd->add_flag("--stdio", *stdio, "serve standard input/output");
    port_opt->excludes(stdio_opt);
    cmd->callback([&g, fit, host, port, stdio, port_opt] {
        if (!*stdio && port_opt->count() == 0)
            throw CLI::ValidationError("serve", "exactly one of --port or --stdio is required");
        const aumap::Projector projector = fit->fit();
        info(g, "serving embedding of " + std::to_string(projector.embedding().size()) +
                    " reference points");
        if (*stdio) {
            aumap::serve_stdio(projector, std::cin, std::cout);
            return;
        }
        aumap::StreamServer server(projector, *host, *port);
        g_server = &server;
        std::signal(SIGINT, stop_server);
        std::signal(SIGTERM, stop_server);
        std::cout << "listening on " << *host << ":" << server.port() << std::endl;
        server.run();
        g_server = nullptr;
        info(g, "shut down");
    });
}

void add_bench(CLI::App& app, GlobalFlags& g, bool project) {
    auto* cmd = project
                    ? app.add_subcommand("bench-project", "time batched projection throughput")
                    : app.add_subcommand("bench-fit", "time projector training");
    cmd->fallthrough();
    auto cond = std::make_shared<aumap::BenchCondition>();
    auto vary = std::make_shared<std::string>("dimensionality");
    auto fixed = std::make_shared<std::size_t>(0);
    auto out = std::make_shared<std::string>();
    auto svg = std::make_shared<std::string>();
    cmd->add_option("--vary", *vary, "swept parameter")
        ->check(CLI::IsMember({"dimensionality", "sample_count"}))
        ->capture_default_str();
    cmd->add_option("--values", cond->values, "swept values, ascending")
        ->required()
        ->delimiter(',');
    cmd->add_option("--fixed", *fixed,
                    "the non-swept parameter (default: 5000 samples / 1000 dimensions)");
    cmd->add_option("--reps", cond->repetitions, "timed repetitions per value")
        ->capture_default_str();
    if (project) {
        cmd->add_option("--test-samples", cond->test_samples, "points projected per repetition")
            ->capture_default_str();
        cmd->add_option("--batch-size", cond->batch_size,
                        "chunk size (set equal to --test-samples for one-go)")
            ->capture_default_str();
    }
    cmd->add_option("--out", *out, "timing CSV path ('-' for stdout)")->required();
    cmd->add_option("--svg", *svg, "also draw a line chart to this path");
    cmd->callback([&g, cond, vary, fixed, out, svg, project] {
        cond->vary = aumap::parse_vary(*vary);
        cond->seed = g.seed;
        cond->fixed_value =
            *fixed > 0 ? *fixed
                       : (cond->vary == aumap::BenchVary::dimensionality ? 5000 : 1000);
        if (!project) cond->batch_size = std::min(cond->batch_size, cond->test_samples);
        const aumap::TimingReport report =
            project ? aumap::bench_project(*cond) : aumap::bench_fit(*cond);
        write_csv_output(*out, aumap::timing_csv(report));
        if (!svg->empty()) {
            const std::string title =
                project ? "projection time, batch size " + std::to_string(cond->batch_size)
                        : "projector fit time";
            aumap::write_text_atomic(*svg, aumap::timing_svg(report, title));
        }
        info(g, report.notes);
        for (const aumap::TimingRow& row : report.rows)
            info(g, std::string(aumap::vary_name(report.vary)) + "=" +
                        std::to_string(row.value) + ": mean " +
                        aumap::format_double(row.mean_seconds) + " s, std " +
                        aumap::format_double(row.std_seconds) + " s, excluded " +
                        std::to_string(row.excluded_count));
    });
}

void add_eval_accuracy(CLI::App& app, GlobalFlags&) {
    auto* cmd = app.add_subcommand("eval-accuracy",
                                   "compare approximate projections against oracle projections");
    cmd->fallthrough();
    auto approx = std::make_shared<std::string>();
    auto oracle = std::make_shared<std::string>();
    auto csv = std::make_shared<bool>(false);
    cmd->add_option("--approx", *approx, "approximate projections CSV")->required();
    cmd->add_option("--oracle", *oracle, "oracle projections CSV")->required();
    cmd->add_flag("--csv", *csv, "emit a CSV row instead of key-value lines");
    cmd->callback([approx, oracle, csv] {
        const aumap::AccuracyReport report = aumap::normalized_mean_distance(
            aumap::load_projections(*approx), aumap::load_projections(*oracle));
        std::cout << (*csv ? aumap::report_csv(report) : aumap::report_kv(report));
    });
}

void add_plot(CLI::App& app, GlobalFlags& g) {
    auto* cmd = app.add_subcommand("plot", "draw the projection scatter figure");
    cmd->fallthrough();
    auto train_inputs = std::make_shared<std::string>();
    auto train_proj = std::make_shared<std::string>();
    auto test_inputs = std::make_shared<std::string>();
    auto oracle = std::make_shared<std::string>();
    auto approx = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    cmd->add_option("--train-inputs", *train_inputs, "training inputs CSV (labels used)")
        ->required();
    cmd->add_option("--train-projections", *train_proj, "training projections CSV")->required();
    cmd->add_option("--test-inputs", *test_inputs, "test inputs CSV (labels used)")->required();
    cmd->add_option("--oracle", *oracle, "oracle test projections CSV")->required();
    cmd->add_option("--approx", *approx, "approximate test projections CSV")->required();
    cmd->add_option("--out", *out, "output SVG path")->required();
    cmd->callback([&g, train_inputs, train_proj, test_inputs, oracle, approx, out] {
        const aumap::LabeledDataset train = aumap::load_dataset(*train_inputs);
        const aumap::LabeledDataset test = aumap::load_dataset(*test_inputs);
        aumap::ReferenceEmbedding embedding;
        embedding.inputs = train.samples;
        embedding.projections = aumap::load_projections(*train_proj);
        aumap::emit_scatter_svg(embedding, train.labels, aumap::load_projections(*oracle),
                                aumap::load_projections(*approx), test.labels, *out);
        info(g, "wrote " + *out);
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"approximate UMAP: real-time out-of-sample projection engine"};
    app.require_subcommand(1);

    GlobalFlags g;
    app.add_option("--seed", g.seed, "seed for randomized subcommands")->capture_default_str();
    app.add_flag("--quiet", g.quiet, "suppress progress messages");

    add_gen_data(app, g);
    add_project(app, g);
    add_serve(app, g);
    add_bench(app, g, /*project=*/false);
    add_bench(app, g, /*project=*/true);
    add_eval_accuracy(app, g);
    add_plot(app, g);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const aumap::Error& e) {
        std::cerr << "error: " << aumap::error_code_name(e.code()) << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
