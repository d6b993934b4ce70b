// Command-line surface for the captioning toolkit: feature extraction,
// vocabulary building, training, prediction, evaluation, and the
// sub-sampling length/timing report.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "acap/io.hpp"
#include "acap/metrics.hpp"
#include "acap/model.hpp"
#include "acap/train.hpp"
#include "acap/wav.hpp"

namespace fs = std::filesystem;
using namespace acap;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool verbose = false;
};

RunConfig load_run_config(const GlobalOpts& g) {
    RunConfig rc;
    rc.resolve();
    if (!g.config_path.empty()) rc = read_run_config(g.config_path, rc);
    if (g.seed_set) rc.training.rng_seed = g.seed;
    return rc;
}

void vlog(const GlobalOpts& g, const std::string& msg) {
    if (g.verbose) std::cerr << msg << '\n';
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

std::string lmel_name(const std::string& file_name) {
    return fs::path(file_name).stem().string() + ".lmel";
}

// Feature matrices for every caption record, failing fast with the full
// offender list when any are missing.
std::map<std::string, Tensor> load_features_for(const std::vector<CaptionRecord>& records,
                                                const std::string& features_dir) {
    std::vector<std::string> missing;
    for (const CaptionRecord& r : records) {
        if (!fs::exists(fs::path(features_dir) / lmel_name(r.file_name))) {
            missing.push_back(r.file_name);
        }
    }
    if (!missing.empty()) {
        std::string msg = "missing feature files for " + std::to_string(missing.size()) +
                          " clip(s) under " + features_dir + ":";
        for (const std::string& m : missing) msg += "\n  " + m;
        throw FileNotFoundError(msg);
    }
    std::map<std::string, Tensor> out;
    for (const CaptionRecord& r : records) {
        if (out.count(r.file_name)) continue;
        FeatureSequence fs_ = read_lmel((fs::path(features_dir) / lmel_name(r.file_name)).string());
        out.emplace(r.file_name, std::move(fs_.data));
    }
    return out;
}

std::size_t common_band_count(const std::map<std::string, Tensor>& features) {
    std::size_t bands = 0;
    for (const auto& [name, t] : features) {
        if (bands == 0) {
            bands = t.cols();
        } else if (t.cols() != bands) {
            throw DimensionError("feature file for \"" + name + "\" has " +
                                 std::to_string(t.cols()) + " bands where " +
                                 std::to_string(bands) + " were seen elsewhere");
        }
    }
    return bands;
}

// ---------------------------------------------------------------------------
// extract-features
// ---------------------------------------------------------------------------

struct ExtractOpts {
    std::string audio_dir;
    std::string out_dir;
    bool force = false;
    std::size_t workers = 0;
};

int cmd_extract_features(const GlobalOpts& g, const ExtractOpts& o) {
    const RunConfig rc = load_run_config(g);

    std::vector<fs::path> wavs;
    if (!fs::is_directory(o.audio_dir)) {
        throw FileNotFoundError("audio directory not found: " + o.audio_dir);
    }
    for (const auto& entry : fs::directory_iterator(o.audio_dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (ext == ".wav") wavs.push_back(entry.path());
    }
    std::sort(wavs.begin(), wavs.end());
    if (wavs.empty()) throw EmptyDataError("no audio files in " + o.audio_dir);
    fs::create_directories(o.out_dir);

    struct Row {
        std::string file_name;
        std::size_t frames = 0;
        double duration = 0.0;
        enum { kExtracted, kSkipped, kFailed } status = kFailed;
        std::string error;
    };
    std::vector<Row> rows(wavs.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= wavs.size()) return;
            Row& row = rows[i];
            row.file_name = wavs[i].filename().string();
            const fs::path out_path = fs::path(o.out_dir) / lmel_name(row.file_name);
            try {
                const AudioClip clip = read_wav(wavs[i].string());
                row.frames = frame_count(clip.samples.size(), rc.features.hop_length);
                row.duration = clip.duration_seconds();
                const bool fresh = fs::exists(out_path) &&
                                   fs::last_write_time(out_path) >= fs::last_write_time(wavs[i]);
                if (fresh && !o.force) {
                    row.status = Row::kSkipped;
                } else {
                    const FeatureSequence feats = log_mel(clip, rc.features, row.file_name);
                    write_lmel(out_path.string(), feats);
                    row.frames = feats.frames();
                    row.status = Row::kExtracted;
                }
            } catch (const Error& e) {
                row.status = Row::kFailed;
                row.error = e.what();
            }
        }
    };

    std::size_t n_workers = o.workers ? o.workers : std::thread::hardware_concurrency();
    n_workers = std::max<std::size_t>(1, std::min(n_workers, wavs.size()));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }

    std::size_t extracted = 0, skipped = 0, failed = 0;
    {
        std::ofstream manifest(fs::path(o.out_dir) / "manifest.csv");
        if (!manifest) throw FileNotFoundError("cannot write manifest.csv");
        manifest << "file_name,T,duration_seconds\n";
        char line[512];
        for (const Row& row : rows) {
            switch (row.status) {
                case Row::kExtracted: ++extracted; break;
                case Row::kSkipped: ++skipped; break;
                case Row::kFailed:
                    ++failed;
                    std::cerr << "failed: " << row.file_name << ": " << row.error << '\n';
                    continue;
            }
            std::snprintf(line, sizeof line, "%s,%zu,%.6f\n", csv_escape(row.file_name).c_str(),
                          row.frames, row.duration);
            manifest << line;
        }
    }
    std::cout << extracted << " extracted, " << skipped << " skipped";
    if (failed) std::cout << ", " << failed << " failed";
    std::cout << '\n';
    return failed ? 1 : 0;
}

// ---------------------------------------------------------------------------
// build-vocab
// ---------------------------------------------------------------------------

struct BuildVocabOpts {
    std::string captions_csv;
    std::string out_path;
    double beta = 0.5;
};

int cmd_build_vocab(const GlobalOpts& g, const BuildVocabOpts& o) {
    vlog(g, "reading " + o.captions_csv);
    const std::vector<CaptionRecord> records = read_caption_csv(o.captions_csv);
    std::vector<std::string> captions;
    for (const CaptionRecord& r : records) {
        captions.insert(captions.end(), r.captions.begin(), r.captions.end());
    }
    const Vocabulary vocab = build_vocab(captions);
    token_weights(vocab, o.beta);  // validates beta before anything is written
    write_vocab_json(o.out_path, vocab, o.beta);
    std::cout << vocab.size() << " tokens (eos at index " << vocab.eos_index << ") -> "
              << o.out_path << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOpts {
    std::string features_dir;
    std::string captions_csv;
    std::string out_dir;
};

int cmd_train(const GlobalOpts& g, const TrainOpts& o) {
    RunConfig rc = load_run_config(g);
    if (!o.features_dir.empty()) rc.paths.features_dir = o.features_dir;
    if (!o.captions_csv.empty()) rc.paths.captions_csv = o.captions_csv;
    if (!o.out_dir.empty()) rc.paths.output_dir = o.out_dir;
    if (rc.paths.features_dir.empty() || rc.paths.captions_csv.empty() ||
        rc.paths.output_dir.empty()) {
        throw ConfigError("train needs --features-dir, --captions and --out-dir (or config paths)");
    }

    const std::vector<CaptionRecord> records = read_caption_csv(rc.paths.captions_csv);
    const std::map<std::string, Tensor> features =
        load_features_for(records, rc.paths.features_dir);

    std::vector<std::string> captions;
    for (const CaptionRecord& r : records) {
        captions.insert(captions.end(), r.captions.begin(), r.captions.end());
    }
    const Vocabulary vocab = build_vocab(captions);
    const WeightTable weights = token_weights(vocab, rc.training.beta_clamp);

    rc.model.F = common_band_count(features);
    rc.model.D = vocab.size();
    rc.model.dropout_p = rc.training.dropout_p;
    rc.model.validate();

    static const std::set<std::size_t> kFactorGrid{1, 2, 4, 8, 16};
    if (!kFactorGrid.count(rc.model.M)) {
        std::cerr << "warning: subsample_factor " << rc.model.M
                  << " departs from the default report grid {1,2,4,8,16}\n";
    }

    std::vector<std::string> too_short;
    for (const auto& [name, t] : features) {
        try {
            encoder_final_length(t.rows(), rc.model.M, rc.model.L);
        } catch (const SequenceTooShortError&) {
            too_short.push_back(name + " (" + std::to_string(t.rows()) + " frames)");
        }
    }
    if (!too_short.empty()) {
        std::string msg = "clips too short for sub-sampling by " + std::to_string(rc.model.M) +
                          " over " + std::to_string(rc.model.L) + " layers:";
        for (const std::string& m : too_short) msg += "\n  " + m;
        throw SequenceTooShortError(msg);
    }

    std::vector<TrainExample> examples;
    for (const CaptionRecord& r : records) {
        for (const std::string& raw : r.captions) {
            TrainExample ex;
            ex.file_name = r.file_name;
            ex.features = features.at(r.file_name);
            ex.targets = encode_caption(normalize_caption(raw), vocab);
            examples.push_back(std::move(ex));
        }
    }

    const Model model = Model::init(rc.model, rc.training.rng_seed);
    std::cout << "parameters: " << param_count(rc.model) << '\n';
    std::cout << "examples: " << examples.size() << " captions over " << features.size()
              << " clips, vocabulary " << vocab.size() << '\n';

    TrainResult result =
        train(model, examples, weights, vocab.eos_index, rc.training, [&](const EpochRecord& r) {
            char line[128];
            std::snprintf(line, sizeof line, "epoch %zu loss %.3f (%.2fs)\n", r.epoch,
                          r.rounded_loss, r.seconds);
            std::cout << line << std::flush;
        });

    fs::create_directories(rc.paths.output_dir);
    const fs::path out(rc.paths.output_dir);
    write_run_config((out / "config.json").string(), rc);
    write_vocab_json((out / "vocab.json").string(), vocab, rc.training.beta_clamp);
    write_epochs_csv((out / "epochs.csv").string(), result.records);
    save_checkpoint((out / "best.sscp").string(), result.best);
    save_checkpoint((out / "last.sscp").string(), result.last);

    std::vector<EvalClip> clips;
    for (const auto& [name, t] : features) clips.push_back({name, t});
    SplitPredictions preds = evaluate_split(result.best, clips, vocab.eos_index);
    for (const std::string& w : preds.warnings) std::cerr << "warning: " << w << '\n';
    std::vector<std::pair<std::string, std::string>> pred_rows;
    for (const auto& [name, tokens] : preds.predictions) {
        pred_rows.emplace_back(name, join_tokens(decode_tokens(tokens, vocab)));
    }
    write_predictions_csv((out / "predictions.csv").string(), pred_rows);

    switch (result.status) {
        case TrainStatus::kEarlyStopped:
            std::cout << "stopped early; best epoch " << result.best_epoch << '\n';
            break;
        case TrainStatus::kMaxEpochs:
            std::cout << "reached max_epochs; best epoch " << result.best_epoch << '\n';
            break;
        case TrainStatus::kDiverged:
            std::cerr << "diverged: " << result.message << " (checkpoints retain the last finite state)\n";
            return 1;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// predict / evaluate
// ---------------------------------------------------------------------------

void check_vocab_compat(const Model& model, const Vocabulary& vocab) {
    if (vocab.size() != model.cfg.D) {
        throw ConfigError("checkpoint/vocabulary mismatch: the checkpoint was trained over " +
                          std::to_string(model.cfg.D) + " tokens, the vocabulary file has " +
                          std::to_string(vocab.size()));
    }
}

void check_feature_compat(const Model& model, std::size_t bands) {
    if (bands != model.cfg.F) {
        throw ConfigError("checkpoint/feature mismatch: feature files carry " +
                          std::to_string(bands) + " bands, the checkpoint expects " +
                          std::to_string(model.cfg.F));
    }
}

struct PredictOpts {
    std::string checkpoint;
    std::string vocab_path;
    std::string features_dir;
    std::string out_path;
};

int cmd_predict(const GlobalOpts& g, const PredictOpts& o) {
    Model model = load_checkpoint(o.checkpoint);
    const VocabFile vf = read_vocab_json(o.vocab_path);
    check_vocab_compat(model, vf.vocab);

    if (!fs::is_directory(o.features_dir)) {
        throw FileNotFoundError("features directory not found: " + o.features_dir);
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(o.features_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".lmel") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw EmptyDataError("no feature files in " + o.features_dir);

    std::vector<EvalClip> clips;
    for (const fs::path& f : files) {
        FeatureSequence fs_ = read_lmel(f.string());
        check_feature_compat(model, fs_.bands());
        clips.push_back({f.filename().string(), std::move(fs_.data)});
    }
    SplitPredictions preds = evaluate_split(model, clips, vf.vocab.eos_index);
    for (const std::string& w : preds.warnings) std::cerr << "warning: " << w << '\n';

    std::vector<std::pair<std::string, std::string>> rows;
    for (const auto& [name, tokens] : preds.predictions) {
        rows.emplace_back(name, join_tokens(decode_tokens(tokens, vf.vocab)));
    }
    if (o.out_path.empty()) {
        std::cout << "file_name,caption_predicted\n";
        for (const auto& [name, caption] : rows) {
            std::cout << csv_escape(name) << ',' << csv_escape(caption) << '\n';
        }
    } else {
        write_predictions_csv(o.out_path, rows);
        vlog(g, "wrote " + o.out_path);
    }
    return 0;
}

struct EvaluateOpts {
    std::string checkpoint;
    std::string vocab_path;
    std::string features_dir;
    std::string captions_csv;
    std::string out_dir;
    std::string sidecar_path;
};

int cmd_evaluate(const GlobalOpts& g, const EvaluateOpts& o) {
    Model model = load_checkpoint(o.checkpoint);
    const VocabFile vf = read_vocab_json(o.vocab_path);
    check_vocab_compat(model, vf.vocab);

    const std::vector<CaptionRecord> records = read_caption_csv(o.captions_csv);
    const std::map<std::string, Tensor> features = load_features_for(records, o.features_dir);
    check_feature_compat(model, common_band_count(features));

    std::vector<EvalClip> clips;
    for (const CaptionRecord& r : records) clips.push_back({r.file_name, features.at(r.file_name)});
    SplitPredictions preds = evaluate_split(model, clips, vf.vocab.eos_index);
    for (const std::string& w : preds.warnings) std::cerr << "warning: " << w << '\n';

    std::map<std::string, const CaptionRecord*> by_name;
    for (const CaptionRecord& r : records) by_name[r.file_name] = &r;

    std::vector<EvaluationItem> items;
    std::vector<std::pair<std::string, std::string>> pred_rows;
    for (const auto& [name, tokens] : preds.predictions) {
        EvaluationItem item;
        item.item_id = name;
        item.candidate = decode_tokens(tokens, vf.vocab);
        for (const std::string& raw : by_name.at(name)->captions) {
            std::vector<std::string> ref = normalize_caption(raw);
            if (!ref.empty() && ref.back() == kEosToken) ref.pop_back();
            item.references.push_back(std::move(ref));
        }
        pred_rows.emplace_back(name, join_tokens(item.candidate));
        items.push_back(std::move(item));
    }

    Sidecar sidecar;
    if (!o.sidecar_path.empty()) sidecar = read_sidecar(o.sidecar_path);
    const MetricsReport report = compute_metrics(items, sidecar.meteor, sidecar.spice);

    fs::create_directories(o.out_dir);
    const fs::path out(o.out_dir);
    write_predictions_csv((out / "predictions.csv").string(), pred_rows);
    write_report_files((out / "report.json").string(), (out / "report.txt").string(), report);
    std::cout << format_metrics_text(report);
    vlog(g, "wrote " + (out / "report.json").string());
    return 0;
}

// ---------------------------------------------------------------------------
// subsample-report
// ---------------------------------------------------------------------------

struct ReportOpts {
    std::size_t t_min = 1292;
    std::size_t t_max = 2584;
    std::size_t layers = 3;
    std::vector<std::size_t> factors{1, 2, 4, 8, 16};
    bool bench = false;
    std::size_t bench_clips = 2;
    std::size_t bench_t = 0;  // 0: use t_max
    std::size_t bench_reps = 2;
};

int cmd_subsample_report(const GlobalOpts& g, const ReportOpts& o) {
    if (o.t_min > o.t_max) throw ConfigError("--t-min must not exceed --t-max");
    if (o.layers < 2) throw ConfigError("--layers must be >= 2");
    if (o.factors.empty()) throw ConfigError("--factors must name at least one factor");

    ModelConfig bench_cfg;
    bench_cfg.L = o.layers;
    bench_cfg.F = 64;
    bench_cfg.D = 4366;
    bench_cfg.dropout_p = 0.0;
    Model bench_model = Model::zeros(bench_cfg);
    std::vector<Tensor> bench_clips;
    const std::size_t bench_t = o.bench_t ? o.bench_t : o.t_max;
    if (o.bench) {
        if (o.bench_clips == 0 || o.bench_reps == 0) {
            throw ConfigError("--bench-clips and --bench-reps must be >= 1");
        }
        bench_model = Model::init(bench_cfg, g.seed);
        SplitMix64 rng(SplitMix64(g.seed).fork(7).next_u64());
        for (std::size_t c = 0; c < o.bench_clips; ++c) {
            Tensor clip({bench_t, bench_cfg.F});
            for (double& x : clip.v) x = rng.uniform(-1.0, 1.0);
            bench_clips.push_back(std::move(clip));
        }
    }

    std::cout << "factor,t_min_out,t_max_out,reduction_percent";
    if (o.bench) std::cout << ",seconds_per_clip";
    std::cout << '\n';

    for (const std::size_t M : o.factors) {
        if (M == 0) throw ConfigError("sub-sampling factors must be >= 1");
        std::string min_col = "degenerate", max_col = "degenerate";
        try {
            min_col = std::to_string(encoder_final_length(o.t_min, M, o.layers));
        } catch (const SequenceTooShortError&) {
        }
        try {
            max_col = std::to_string(encoder_final_length(o.t_max, M, o.layers));
        } catch (const SequenceTooShortError&) {
        }
        const double ideal =
            100.0 * (1.0 - std::pow(static_cast<double>(M),
                                    -static_cast<double>(o.layers - 1)));
        char pct[16];
        std::snprintf(pct, sizeof pct, "%05.2f", trunc_to_digits(ideal, 2));
        std::cout << M << ',' << min_col << ',' << max_col << ',' << pct;

        if (o.bench) {
            bench_model.cfg.M = M;
            bool degenerate = false;
            try {
                encoder_final_length(bench_t, M, o.layers);
            } catch (const SequenceTooShortError&) {
                degenerate = true;
            }
            if (degenerate) {
                std::cout << ",degenerate";
            } else {
                double best = 0.0;
                for (std::size_t rep = 0; rep < o.bench_reps; ++rep) {
                    const auto t0 = std::chrono::steady_clock::now();
                    for (const Tensor& clip : bench_clips) {
                        // eos index outside the vocabulary: every decode runs
                        // the full S_max steps, so factors are compared on
                        // identical decode work.
                        caption_features(bench_model, clip, bench_cfg.D);
                    }
                    const double secs =
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                            .count();
                    if (rep == 0 || secs < best) best = secs;
                }
                char col[32];
                std::snprintf(col, sizeof col, "%.4f",
                              best / static_cast<double>(o.bench_clips));
                std::cout << ',' << col;
            }
        }
        std::cout << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------------------
// config
// ---------------------------------------------------------------------------

int cmd_config(const GlobalOpts& g, bool dump_defaults, const std::string& out_path) {
    RunConfig rc;
    rc.resolve();
    if (!dump_defaults) rc = load_run_config(g);
    const std::string text = run_config_to_json(rc).dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream os(out_path);
        if (!os) throw FileNotFoundError("cannot write " + out_path);
        os << text;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sequence-to-sequence audio captioning toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "JSON configuration file");
    auto* seed_opt = app.add_option("--seed", g.seed, "seed overriding the configured rng_seed");
    app.add_flag("--verbose", g.verbose, "chatty progress on stderr");

    ExtractOpts ex;
    auto* sc_extract = app.add_subcommand("extract-features", "WAV directory -> .lmel features");
    sc_extract->fallthrough();
    sc_extract->add_option("--audio-dir", ex.audio_dir, "directory of WAV clips")->required();
    sc_extract->add_option("--out-dir", ex.out_dir, "feature output directory")->required();
    sc_extract->add_flag("--force", ex.force, "re-extract even when outputs are up to date");
    sc_extract->add_option("--workers", ex.workers, "worker threads (default: hardware)");

    BuildVocabOpts bv;
    auto* sc_vocab = app.add_subcommand("build-vocab", "captions CSV -> vocabulary JSON");
    sc_vocab->fallthrough();
    sc_vocab->add_option("--captions", bv.captions_csv, "captions CSV")->required();
    sc_vocab->add_option("--out", bv.out_path, "vocabulary JSON path")->required();
    sc_vocab->add_option("--beta", bv.beta, "weight clamp in (0, 1]");

    TrainOpts tr;
    auto* sc_train = app.add_subcommand("train", "optimize a captioning model");
    sc_train->fallthrough();
    sc_train->add_option("--features-dir", tr.features_dir, "directory of .lmel files");
    sc_train->add_option("--captions", tr.captions_csv, "captions CSV");
    sc_train->add_option("--out-dir", tr.out_dir, "run directory");

    PredictOpts pr;
    auto* sc_predict = app.add_subcommand("predict", "decode captions for feature files");
    sc_predict->fallthrough();
    sc_predict->add_option("--checkpoint", pr.checkpoint, "model checkpoint")->required();
    sc_predict->add_option("--vocab", pr.vocab_path, "vocabulary JSON")->required();
    sc_predict->add_option("--features-dir", pr.features_dir, "directory of .lmel files")
        ->required();
    sc_predict->add_option("--out", pr.out_path, "predictions CSV (default: stdout)");

    EvaluateOpts ev;
    auto* sc_eval = app.add_subcommand("evaluate", "score predictions against references");
    sc_eval->fallthrough();
    sc_eval->add_option("--checkpoint", ev.checkpoint, "model checkpoint")->required();
    sc_eval->add_option("--vocab", ev.vocab_path, "vocabulary JSON")->required();
    sc_eval->add_option("--features-dir", ev.features_dir, "directory of .lmel files")->required();
    sc_eval->add_option("--captions", ev.captions_csv, "reference captions CSV")->required();
    sc_eval->add_option("--out-dir", ev.out_dir, "report output directory")->required();
    sc_eval->add_option("--sidecar", ev.sidecar_path, "external metric JSON sidecar");

    ReportOpts rp;
    auto* sc_report = app.add_subcommand("subsample-report", "sequence-length reduction table");
    sc_report->fallthrough();
    sc_report->add_option("--t-min", rp.t_min, "shortest input length");
    sc_report->add_option("--t-max", rp.t_max, "longest input length");
    sc_report->add_option("--layers", rp.layers, "encoder layers");
    sc_report->add_option("--factors", rp.factors, "sub-sampling factors")->delimiter(',');
    sc_report->add_flag("--bench", rp.bench, "time inference per factor on random clips");
    sc_report->add_option("--bench-clips", rp.bench_clips, "clips per timing rep");
    sc_report->add_option("--bench-t", rp.bench_t, "frames per bench clip (default: --t-max)");
    sc_report->add_option("--bench-reps", rp.bench_reps, "timing repetitions (min is reported)");

    bool dump_defaults = false;
    std::string config_out;
    auto* sc_config = app.add_subcommand("config", "print the resolved configuration");
    sc_config->fallthrough();
    sc_config->add_flag("--dump-defaults", dump_defaults, "ignore --config and print defaults");
    sc_config->add_option("--out", config_out, "write to a file instead of stdout");

    CLI11_PARSE(app, argc, argv);
    g.seed_set = seed_opt->count() > 0;

    try {
        if (sc_extract->parsed()) return cmd_extract_features(g, ex);
        if (sc_vocab->parsed()) return cmd_build_vocab(g, bv);
        if (sc_train->parsed()) return cmd_train(g, tr);
        if (sc_predict->parsed()) return cmd_predict(g, pr);
        if (sc_eval->parsed()) return cmd_evaluate(g, ev);
        if (sc_report->parsed()) return cmd_subsample_report(g, rp);
        if (sc_config->parsed()) return cmd_config(g, dump_defaults, config_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
