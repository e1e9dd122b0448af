#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tnet/architectures.hpp"
#include "tnet/benchmark.hpp"
#include "tnet/cost.hpp"
#include "tnet/dataset.hpp"
#include "tnet/descriptor.hpp"
#include "tnet/gradcheck.hpp"
#include "tnet/model_io.hpp"
#include "tnet/trainer.hpp"

using namespace tnet;

namespace {

struct ArchOptions {
    std::string arch;
    int n = 0;          // 0 = per-architecture default
    int filters = 4;
    int classes = 11;
    std::string bn_mode = "width";
};

void add_arch_flags(CLI::App* cmd, ArchOptions& opt) {
    cmd->add_option("--arch", opt.arch,
                    "tinynet | smallfirenet | fire-baseline | baseline-cnn | descriptor file");
    cmd->add_option("--n", opt.n, "module count for tinynet/smallfirenet");
    cmd->add_option("--filters", opt.filters, "per-conv filters for tinynet (4 or 8)");
    cmd->add_option("--classes", opt.classes, "class count");
    cmd->add_option("--bn-mode", opt.bn_mode, "width | channel normalization axis");
}

NetworkDef resolve_arch(const ArchOptions& opt) {
    NetworkDef def;
    if (opt.arch == "tinynet") {
        def = tinynet(opt.filters, opt.n > 0 ? opt.n : 5, opt.classes);
    } else if (opt.arch == "smallfirenet") {
        def = smallfirenet(opt.n > 0 ? opt.n : 3, opt.classes);
    } else if (opt.arch == "fire-baseline") {
        def = fire_baseline(opt.classes);
    } else if (opt.arch == "baseline-cnn") {
        def = baseline_cnn(opt.classes);
    } else if (!opt.arch.empty()) {
        std::ifstream is(opt.arch);
        if (!is) throw BuildError("unknown architecture or unreadable descriptor: " + opt.arch);
        std::ostringstream text;
        text << is.rdbuf();
        def = parse_descriptor(text.str());
        validate(def);
        const std::size_t slash = opt.arch.find_last_of('/');
        def.name = slash == std::string::npos ? opt.arch : opt.arch.substr(slash + 1);
    } else {
        throw BuildError("--arch is required");
    }
    if (opt.bn_mode == "width")
        def.bn_mode = BnMode::width_axis;
    else if (opt.bn_mode == "channel")
        def.bn_mode = BnMode::channel_axis;
    else
        throw BuildError("--bn-mode must be width or channel, got '" + opt.bn_mode + "'");
    return def;
}

DatasetSplit resolve_data(const std::string& data_dir, const std::string& manifest,
                          int synthetic, std::uint64_t seed) {
    if (synthetic > 0) return synth_generate(synthetic, seed);
    if (data_dir.empty()) throw DataError("provide --data <dir> with --manifest, or --synthetic N");
    if (manifest.empty()) throw DataError("--data needs --manifest <file>");
    return load_directory(data_dir, manifest);
}

int run(int argc, char** argv) {
    CLI::App app{"micro-CNN engine: build, train, evaluate and benchmark"};
    app.require_subcommand(1);

    ArchOptions arch_opt;

    auto* cmd_build = app.add_subcommand("build", "shape-check a network and print its costs");
    add_arch_flags(cmd_build, arch_opt);

    auto* cmd_train = app.add_subcommand("train", "train and save a model");
    add_arch_flags(cmd_train, arch_opt);
    std::string data_dir, manifest, out_path = "model.tnet", metrics_path;
    int synthetic = 0;
    TrainConfig tcfg;
    cmd_train->add_option("--data", data_dir, "dataset root (class subdirectories of graymaps)");
    cmd_train->add_option("--manifest", manifest, "class manifest: name,index per line");
    cmd_train->add_option("--synthetic", synthetic, "generate N synthetic samples per class");
    cmd_train->add_option("--seed", tcfg.seed, "training seed");
    cmd_train->add_option("--epochs", tcfg.epochs, "epochs");
    cmd_train->add_option("--lr", tcfg.lr, "learning rate");
    cmd_train->add_option("--batch", tcfg.batch, "batch size");
    cmd_train->add_option("--out", out_path, "model output path");
    cmd_train->add_option("--metrics", metrics_path, "metrics CSV path (default: stdout)");

    auto* cmd_eval = app.add_subcommand("eval", "k-fold cross-validated accuracy");
    add_arch_flags(cmd_eval, arch_opt);
    int folds = 5;
    cmd_eval->add_option("--data", data_dir, "dataset root");
    cmd_eval->add_option("--manifest", manifest, "class manifest");
    cmd_eval->add_option("--synthetic", synthetic, "generate N synthetic samples per class");
    cmd_eval->add_option("--seed", tcfg.seed, "seed");
    cmd_eval->add_option("--epochs", tcfg.epochs, "epochs per fold");
    cmd_eval->add_option("--lr", tcfg.lr, "learning rate");
    cmd_eval->add_option("--batch", tcfg.batch, "batch size");
    cmd_eval->add_option("--k", folds, "fold count");

    auto* cmd_predict = app.add_subcommand("predict", "classify one graymap image");
    std::string model_path, image_path;
    cmd_predict->add_option("--model", model_path, "model file")->required();
    cmd_predict->add_option("--image", image_path, "96x96 binary graymap")->required();

    auto* cmd_bench = app.add_subcommand("bench", "measure single-core inference latency");
    add_arch_flags(cmd_bench, arch_opt);
    int runs = 50, warmup = 10;
    bool suite = false;
    std::string against, csv_out;
    cmd_bench->add_option("--model", model_path, "benchmark a saved model instead of --arch");
    cmd_bench->add_option("--runs", runs, "measured runs");
    cmd_bench->add_option("--warmup", warmup, "warmup runs");
    cmd_bench->add_flag("--suite", suite, "bench the four evaluated networks and compare");
    cmd_bench->add_option("--against", against, "reference report CSV for speedup");
    cmd_bench->add_option("--csv", csv_out, "also write the report as CSV");

    auto* cmd_export = app.add_subcommand("export", "print a model's architecture descriptor");
    cmd_export->add_option("--model", model_path, "model file")->required();
    std::string export_out;
    cmd_export->add_option("--out", export_out, "write to file instead of stdout");

    auto* cmd_check = app.add_subcommand("import-check", "validate a model file");
    cmd_check->add_option("--model", model_path, "model file")->required();

    auto* cmd_gradcheck =
        app.add_subcommand("gradcheck", "finite-difference gradient validation");
    add_arch_flags(cmd_gradcheck, arch_opt);
    std::uint64_t gc_seed = 1;
    cmd_gradcheck->add_option("--seed", gc_seed, "seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    if (cmd_build->parsed()) {
        const NetworkDef def = resolve_arch(arch_opt);
        std::cout << format_cost_report(cost_report(lower(def)), def);
        return 0;
    }

    if (cmd_train->parsed()) {
        const NetworkDef def = resolve_arch(arch_opt);
        Network<float> model(lower(def));
        DatasetSplit data = resolve_data(data_dir, manifest, synthetic, tcfg.seed);
        std::cerr << "train " << (def.name.empty() ? "custom" : def.name) << ": lr=" << tcfg.lr
                  << " epochs=" << tcfg.epochs << " batch=" << tcfg.batch
                  << " seed=" << tcfg.seed << " samples=" << data.train.size() << "\n";
        std::ofstream metrics_file;
        std::ostream* metrics = &std::cout;
        if (!metrics_path.empty()) {
            metrics_file.open(metrics_path, std::ios::trunc);
            if (!metrics_file) throw DataError("cannot open " + metrics_path + " for writing");
            metrics = &metrics_file;
        }
        const TrainResult result = train(model, data.train, tcfg, metrics);
        save_model(model, out_path);
        std::cerr << "final train accuracy " << result.final_train_accuracy << "; model saved to "
                  << out_path << "\n";
        if (!data.test.empty())
            std::cerr << "held-out accuracy " << evaluate_accuracy(model, data.test, tcfg.batch)
                      << "\n";
        return 0;
    }

    if (cmd_eval->parsed()) {
        const NetworkDef def = resolve_arch(arch_opt);
        DatasetSplit data = resolve_data(data_dir, manifest, synthetic, tcfg.seed);
        std::vector<LabeledImage> all = std::move(data.train);
        for (auto& img : data.test) all.push_back(std::move(img));
        const KFoldResult result = kfold_evaluate(lower(def), all, folds, tcfg);
        for (std::size_t i = 0; i < result.fold_accuracy.size(); ++i)
            std::cout << "fold " << i << " accuracy " << result.fold_accuracy[i] << "\n";
        std::cout << "accuracy mean=" << result.mean << " std=" << result.stddev << "\n";
        return 0;
    }

    if (cmd_predict->parsed()) {
        LoadedModel loaded = load_model(model_path);
        LabeledImage img = load_graymap(image_path);
        const Tensor<float>& probs = loaded.model->forward(img.pixels, Phase::infer);
        int best = 0;
        for (int c = 1; c < probs.shape.c; ++c)
            if (probs.at(0, c, 0, 0) > probs.at(0, best, 0, 0)) best = c;
        std::cout << best << "\n";
        for (int c = 0; c < probs.shape.c; ++c)
            std::cout << (c ? " " : "") << probs.at(0, c, 0, 0);
        std::cout << "\n";
        return 0;
    }

    if (cmd_bench->parsed()) {
        std::vector<BenchReport> reports;
        if (suite) {
            for (const NetworkDef& def :
                 {tinynet(4, 5, arch_opt.classes), smallfirenet(3, arch_opt.classes),
                  fire_baseline(arch_opt.classes), baseline_cnn(arch_opt.classes)}) {
                Network<float> model(lower(def));
                Rng rng(7);
                model.init_params(rng);
                reports.push_back(bench(model, warmup, runs));
            }
            reports = compare(std::move(reports), "baseline-cnn");
        } else if (!model_path.empty()) {
            LoadedModel loaded = load_model(model_path);
            reports.push_back(bench(*loaded.model, warmup, runs));
        } else {
            const NetworkDef def = resolve_arch(arch_opt);
            Network<float> model(lower(def));
            Rng rng(7);
            model.init_params(rng);
            reports.push_back(bench(model, warmup, runs));
        }
        if (!against.empty() && !suite) {
            std::ifstream is(against);
            if (!is) throw DataError("cannot open reference report " + against);
            std::string line, header;
            std::getline(is, header);
            while (std::getline(is, line)) {
                if (line.empty()) continue;
                BenchReport ref;
                std::istringstream ls(line);
                std::string field;
                std::getline(ls, ref.name, ',');
                std::getline(ls, field, ',');
                ref.params = std::stoll(field);
                std::getline(ls, field, ',');
                ref.flops = std::stoll(field);
                std::getline(ls, field, ',');
                ref.mean_ms = std::stod(field);
                std::getline(ls, field, ',');
                ref.std_ms = std::stod(field);
                reports.push_back(ref);
            }
            if (reports.size() < 2) throw DataError(against + " holds no reference rows");
            reports = compare(std::move(reports), reports[1].name);
        }
        std::cout << format_compare_table(reports);
        if (!csv_out.empty()) {
            std::ofstream os(csv_out, std::ios::trunc);
            if (!os) throw DataError("cannot open " + csv_out + " for writing");
            os << bench_csv_header() << "\n";
            for (const BenchReport& r : reports) os << bench_csv_row(r) << "\n";
        }
        return 0;
    }

    if (cmd_export->parsed()) {
        LoadedModel loaded = load_model(model_path);
        const std::string text = write_descriptor(loaded.model->lowered().def);
        if (export_out.empty()) {
            std::cout << text;
        } else {
            std::ofstream os(export_out, std::ios::trunc);
            if (!os) throw DataError("cannot open " + export_out + " for writing");
            os << text;
        }
        return 0;
    }

    if (cmd_check->parsed()) {
        LoadedModel loaded = load_model(model_path);
        auto params = loaded.model->params();
        long long trainable = loaded.model->trainable_param_count();
        std::cout << "ok: " << params.size() << " parameter blobs, " << trainable
                  << " trainable parameters\n";
        return 0;
    }

    if (cmd_gradcheck->parsed()) {
        const NetworkDef def = resolve_arch(arch_opt);
        const GradCheckReport rep = gradient_check(def, gc_seed);
        std::cout << "max_rel_error " << rep.max_rel_error << " over " << rep.checked
                  << " elements (worst " << rep.worst_param << ", " << rep.skipped_kinks
                  << " skipped at kinks)\n";
        return 0;
    }

    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const EngineError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
