// Copyright 2026 The onedp Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The onedp command-line tool.
//
// Exit status: 0 on success, 2 on usage errors, 1 on runtime errors. Every
// failure writes one machine-readable line to stderr:
//
//   error kind=<kind> message="<text>"
//
// Relative --model and --data paths that do not exist are looked up under
// $ONEDP_CACHE; train writes to $ONEDP_CACHE/train when --out is omitted.

#ifndef ONEDP_CLI_HPP_
#define ONEDP_CLI_HPP_

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "onedp/analysis.hpp"
#include "onedp/checkpoint.hpp"
#include "onedp/codec.hpp"
#include "onedp/config.hpp"
#include "onedp/dataset.hpp"
#include "onedp/error.hpp"
#include "onedp/log.hpp"
#include "onedp/metrics.hpp"
#include "onedp/plot.hpp"
#include "onedp/synth.hpp"
#include "onedp/trainer.hpp"

namespace onedp::cli {

namespace fs = std::filesystem;

inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 1;

inline std::optional<fs::path> cache_dir() {
  const char* env = std::getenv("ONEDP_CACHE");
  if (env == nullptr || *env == '\0') return std::nullopt;
  return fs::path(env);
}

// `p` itself when it exists, else $ONEDP_CACHE/p when that exists.
inline fs::path resolve_input(const fs::path& p) {
  if (fs::exists(p) || p.is_absolute()) return p;
  if (auto cache = cache_dir(); cache && fs::exists(*cache / p)) return *cache / p;
  return p;
}

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

inline void error_line(std::ostream& err, std::string_view kind, const std::string& message) {
  err << "error kind=" << kind << " message=" << quote(message) << '\n';
}

inline std::vector<int> default_lengths(int n) {
  std::vector<int> out;
  for (int v = 1; v < n; v *= 2) out.push_back(v);
  out.push_back(n);
  return out;
}

inline Model load_model(const fs::path& path) { return load_checkpoint(resolve_input(path)).model; }

inline Dataset load_data(const fs::path& path, const Model& model, size_t limit = 0) {
  Dataset ds = load_dataset(resolve_input(path), model.config.image_size, {},
                            model.config.channels);
  if (limit > 0 && ds.size() > limit) {
    ds.images.resize(limit);
    ds.paths.resize(limit);
    ds.labels.resize(limit);
  }
  return ds;
}

struct Options {
  fs::path config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  int verbose = 0;
  bool quiet = false;

  std::uint64_t seed_or(std::uint64_t fallback) const { return seed.value_or(fallback); }
};

// defaults < config file < --seed < --set
inline Config resolve_config(const Options& o) {
  std::vector<std::string> overrides;
  if (o.seed) {
    overrides.push_back("train.seed=" + std::to_string(*o.seed));
    overrides.push_back("ttd.seed=" + std::to_string(*o.seed));
  }
  overrides.insert(overrides.end(), o.overrides.begin(), o.overrides.end());
  return load_config(o.config, overrides);
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variable-length 1D image tokenizer: train, encode, decode, evaluate.", "onedp"};
  app.fallthrough();
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "JSON config file (defaults < file < --seed < --set)");
  app.add_option("--set", o.overrides, "Config override section.key=value (repeatable)");
  app.add_option("--seed", o.seed, "Seed for every random stream");
  app.add_flag("-v,--verbose", o.verbose, "More logging (repeatable)");
  app.add_flag("-q,--quiet", o.quiet, "Only errors");

  // train
  auto* train = app.add_subcommand("train", "Train a tokenizer on a directory of PNGs");
  fs::path train_data, train_out;
  train->add_option("--data", train_data, "Training image directory")->required();
  train->add_option("--out", train_out, "Output directory (default $ONEDP_CACHE/train)");

  // encode
  auto* encode = app.add_subcommand("encode", "Encode a PNG into a .1dp token stream");
  fs::path enc_model, enc_in, enc_out;
  int enc_tokens = 0;
  encode->add_option("--model", enc_model, "Checkpoint")->required();
  encode->add_option("--tokens", enc_tokens, "Tokens to keep (default: all)");
  encode->add_option("input", enc_in, "Input PNG")->required();
  encode->add_option("output", enc_out, "Output .1dp file")->required();

  // decode
  auto* decode = app.add_subcommand("decode", "Decode a .1dp token stream into a PNG");
  fs::path dec_model, dec_in, dec_out;
  std::optional<int> dec_prefix;
  bool dec_lenient = false;
  decode->add_option("--model", dec_model, "Checkpoint")->required();
  decode->add_option("--prefix", dec_prefix, "Decode only the first n tokens");
  decode->add_flag("--lenient", dec_lenient, "Warn instead of failing on pad bits / model_id");
  decode->add_option("input", dec_in, "Input .1dp file")->required();
  decode->add_option("output", dec_out, "Output PNG")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Rate-distortion sweep over prefix lengths");
  fs::path ev_model, ev_data, ev_out, ev_plot;
  std::vector<int> ev_lengths;
  bool ev_frechet = false;
  size_t ev_limit = 0;
  eval->add_option("--model", ev_model, "Checkpoint")->required();
  eval->add_option("--data", ev_data, "Held-out image directory")->required();
  eval->add_option("--lengths", ev_lengths, "Comma-separated token counts")->delimiter(',');
  eval->add_option("--out", ev_out, "Output CSV")->required();
  eval->add_option("--plot", ev_plot, "Optional PNG chart of l2 against token count");
  eval->add_flag("--frechet", ev_frechet, "Add Frechet distance of pooled encoder features");
  eval->add_option("--limit", ev_limit, "Use at most this many images");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Token analyses");
  analyze->require_subcommand(1);
  struct AnalyzeArgs {
    fs::path model, data, out;
    size_t limit = 0;
  };
  auto add_common = [](CLI::App* c, AnalyzeArgs& a) {
    c->add_option("--model", a.model, "Checkpoint")->required();
    c->add_option("--data", a.data, "Image directory")->required();
    c->add_option("--out", a.out, "Output directory")->required();
    c->add_option("--limit", a.limit, "Use at most this many images");
  };
  AnalyzeArgs contrib_args, cluster_args, swap_args, aprobe_args;
  int contrib_trials = 16;
  auto* contrib = analyze->add_subcommand("contribution", "Per-position contribution maps");
  add_common(contrib, contrib_args);
  contrib->add_option("--trials", contrib_trials, "Random replacements per position")
      ->check(CLI::PositiveNumber);
  auto* clusters = analyze->add_subcommand("clusters", "Group images by their first token");
  add_common(clusters, cluster_args);
  std::vector<int> swap_lengths;
  auto* swap = analyze->add_subcommand("swap", "First-token swap gaps by prefix length");
  add_common(swap, swap_args);
  swap->add_option("--tokens", swap_lengths, "Comma-separated prefix lengths")->delimiter(',');
  ProbeConfig probe_cfg;
  auto* aprobe = analyze->add_subcommand("probe", "Linear probe on pooled encoder features");
  add_common(aprobe, aprobe_args);

  // probe
  auto* probe = app.add_subcommand("probe", "Linear probe on pooled encoder features");
  AnalyzeArgs probe_args;
  probe->add_option("--model", probe_args.model, "Checkpoint")->required();
  probe->add_option("--data", probe_args.data, "Labeled image directory")->required();
  probe->add_option("--out", probe_args.out, "Optional output CSV");
  for (CLI::App* c : {probe, aprobe}) {
    c->add_option("--epochs", probe_cfg.epochs, "Training epochs")->check(CLI::PositiveNumber);
    c->add_option("--test-fraction", probe_cfg.test_fraction, "Held-out fraction per class");
  }

  // inspect
  auto* inspect = app.add_subcommand("inspect", "Print a .1dp header or checkpoint summary");
  fs::path insp_file;
  bool insp_lenient = false;
  inspect->add_option("file", insp_file, ".1dp file or checkpoint")->required();
  inspect->add_flag("--lenient", insp_lenient, "Warn instead of failing on pad bits");

  // synth
  auto* synth = app.add_subcommand("synth", "Write the procedural 10-class PNG corpus");
  fs::path synth_out;
  int synth_count = 512, synth_size = 32, synth_classes = 10;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--count", synth_count, "Number of images")->check(CLI::PositiveNumber);
  synth->add_option("--size", synth_size, "Image side in pixels")->check(CLI::PositiveNumber);
  synth->add_option("--classes", synth_classes, "Number of classes (1-10)")
      ->check(CLI::Range(1, 10));

  // compare
  auto* compare = app.add_subcommand("compare", "Metrics of external reconstructions");
  fs::path cmp_originals, cmp_out;
  std::vector<fs::path> cmp_dirs;
  compare->add_option("--originals", cmp_originals, "Original image directory")->required();
  compare->add_option("--out", cmp_out, "Output CSV")->required();
  compare->add_option("dirs", cmp_dirs, "Reconstruction directories")->required();

  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    error_line(err, "usage", e.what());
    err << app.help();
    return kExitUsage;
  }

  log::verbosity() = o.quiet ? 0 : 1 + o.verbose;

  try {
    if (*train) {
      const Config cfg = resolve_config(o);
      fs::path out_dir = train_out;
      if (out_dir.empty()) {
        const auto cache = cache_dir();
        require(cache.has_value(), ErrorKind::kInvalidInput,
                "train needs --out or ONEDP_CACHE");
        out_dir = *cache / "train";
      }
      const Dataset ds = load_dataset(resolve_input(train_data), cfg.model.image_size,
                                      {cfg.train.random_crop, cfg.train.random_flip},
                                      cfg.model.channels);
      Model model = init_model<float>(cfg.model, cfg.train.seed);
      fs::create_directories(out_dir);
      const std::string cfg_text = to_json(cfg).dump(2) + "\n";
      write_text_atomic(out_dir / "config.json", cfg_text);
      const FitResult r = fit(ds, model, cfg, out_dir, [](int s, int total, const LossReport& lr) {
        if ((s + 1) % 100 == 0 || s + 1 == total) {
          log::info("step " + std::to_string(s + 1) + "/" + std::to_string(total) +
                    " total=" + format_metric(lr.total) + " l2=" + format_metric(lr.l2_recon));
        }
      });
      out << "checkpoint=" << r.checkpoint.string() << "\n"
          << "loss_log=" << r.loss_log.string() << "\n"
          << "steps=" << r.steps << "\n"
          << "codebook_usage=" << format_metric(codebook_usage_fraction(model)) << "\n";
    } else if (*encode) {
      const Model model = load_model(enc_model);
      const int n = enc_tokens > 0 ? enc_tokens : model.config.n_latent_tokens;
      const TokenStreamFile f = encode_image(enc_in, model, n, enc_out);
      out << "tokens=" << f.tokens.size() << "\n"
          << "bytes=" << stream_file_size(f.tokens.size(), f.header.bits_per_token) << "\n";
    } else if (*decode) {
      const Model model = load_model(dec_model);
      const ParseMode mode = dec_lenient ? ParseMode::kLenient : ParseMode::kStrict;
      decode_file(dec_in, model, dec_prefix, mode, dec_out);
      out << "wrote=" << dec_out.string() << "\n";
    } else if (*eval) {
      const Model model = load_model(ev_model);
      const Dataset ds = load_data(ev_data, model, ev_limit);
      const std::vector<int> lengths =
          ev_lengths.empty() ? default_lengths(model.config.n_latent_tokens) : ev_lengths;
      const std::vector<RDPoint> pts =
          rd_sweep(model, ds.images, lengths, {.frechet = ev_frechet});
      const std::string csv = rd_csv(pts);
      write_text_atomic(ev_out, csv);
      if (!ev_plot.empty()) {
        Series s;
        for (const RDPoint& p : pts) {
          s.x.push_back(p.n_tokens);
          s.y.push_back(p.l2);
        }
        write_png(ev_plot, line_chart(std::span(&s, 1), /*log2_x=*/true));
      }
      out << csv;
    } else if (*analyze) {
      const std::uint64_t seed = o.seed_or(0);
      if (*contrib) {
        const Model model = load_model(contrib_args.model);
        const Dataset ds = load_data(contrib_args.data, model, contrib_args.limit);
        const ContributionReport r = token_contribution(model, ds.images, contrib_trials, seed);
        fs::create_directories(contrib_args.out);
        write_text_atomic(contrib_args.out / "contribution.csv", contribution_csv(r));
        write_png(contrib_args.out / "contribution.png", heatmap_grid(r.per_token_map, 8));
        out << "head_tail_ratio=" << format_metric(head_tail_ratio(r.per_token_l1)) << "\n";
      } else if (*clusters) {
        const Model model = load_model(cluster_args.model);
        const Dataset ds = load_data(cluster_args.data, model, cluster_args.limit);
        const ClusterReport r = first_token_cluster(model, ds.images);
        fs::create_directories(cluster_args.out);
        write_text_atomic(cluster_args.out / "clusters.csv", cluster_csv(r));
        constexpr size_t kSheets = 16, kPerSheet = 64;
        const auto sizes = cluster_sizes(r);
        for (size_t c = 0; c < std::min(kSheets, sizes.size()); ++c) {
          std::vector<ImageTensor> members;
          for (size_t idx : r.clusters.at(sizes[c].first)) {
            if (members.size() == kPerSheet) break;
            members.push_back(ds.images[idx]);
          }
          write_png(cluster_args.out / ("cluster_" + std::to_string(sizes[c].first) + ".png"),
                    contact_sheet(members, 8));
        }
        out << "clusters=" << r.clusters.size() << "\nimages=" << r.total << "\n";
      } else if (*swap) {
        const Model model = load_model(swap_args.model);
        const Dataset ds = load_data(swap_args.data, model, swap_args.limit);
        const int n = model.config.n_latent_tokens;
        const std::vector<int> lengths =
            swap_lengths.empty() ? std::vector<int>{std::min(4, n), n} : swap_lengths;
        const std::vector<double> gaps = swap_gaps(model, ds.images, lengths, seed);
        std::string csv = "n_tokens,l1_gap\n";
        for (size_t i = 0; i < lengths.size(); ++i) {
          csv += std::to_string(lengths[i]) + "," + format_metric(gaps[i]) + "\n";
        }
        fs::create_directories(swap_args.out);
        write_text_atomic(swap_args.out / "swap.csv", csv);
        const std::vector<TokenSequence> tokens =
            tokenize_batch(model, std::span(ds.images).first(std::min<size_t>(8, ds.size())));
        const std::vector<TokenId> partners =
            swap_partners(tokens, model.config.codebook_size, seed);
        std::vector<ImageTensor> tiles;
        for (size_t j = 0; j < tokens.size(); ++j) {
          tiles.push_back(ds.images[j]);
          for (int len : lengths) {
            SwapPair p = first_token_swap(model, ds.images[j], partners[j], len);
            tiles.push_back(std::move(p.original));
            tiles.push_back(std::move(p.swapped));
          }
        }
        write_png(swap_args.out / "swap_examples.png",
                  contact_sheet(tiles, static_cast<int>(1 + 2 * lengths.size())));
        out << csv;
      } else if (*aprobe) {
        probe_cfg.seed = seed;
        const Model model = load_model(aprobe_args.model);
        const Dataset ds = load_data(aprobe_args.data, model, aprobe_args.limit);
        const ProbeStudy s = probe_study(model, ds, probe_cfg);
        std::ostringstream csv;
        csv << "features,accuracy,n_test\n"
            << "encoder," << format_metric(s.encoder.accuracy) << "," << s.encoder.n_test << "\n"
            << "shuffled_labels," << format_metric(s.shuffled.accuracy) << ","
            << s.shuffled.n_test << "\n"
            << "pixels," << format_metric(s.pixels.accuracy) << "," << s.pixels.n_test << "\n";
        fs::create_directories(aprobe_args.out);
        write_text_atomic(aprobe_args.out / "probe.csv", csv.str());
        out << csv.str() << "margin_sigmas=" << format_metric(s.margin_sigmas) << "\n";
      }
    } else if (*probe) {
      probe_cfg.seed = o.seed_or(0);
      const Model model = load_model(probe_args.model);
      const Dataset ds = load_data(probe_args.data, model);
      const ProbeResult r = linear_probe(model, ds, probe_cfg);
      std::ostringstream text;
      text << "accuracy=" << format_metric(r.accuracy) << "\n"
           << "n_train=" << r.n_train << "\nn_test=" << r.n_test << "\n"
           << "classes=" << r.n_classes << "\n";
      if (!probe_args.out.empty()) {
        write_text_atomic(probe_args.out, "accuracy,n_train,n_test,classes\n" +
                                              format_metric(r.accuracy) + "," +
                                              std::to_string(r.n_train) + "," +
                                              std::to_string(r.n_test) + "," +
                                              std::to_string(r.n_classes) + "\n");
      }
      out << text.str();
    } else if (*inspect) {
      const std::vector<char> raw = read_file(insp_file);
      if (raw.size() >= kStreamMagic.size() &&
          std::equal(kStreamMagic.begin(), kStreamMagic.end(), raw.begin())) {
        const Bytes bytes(raw.begin(), raw.end());
        const TokenStreamFile f =
            parse_stream(bytes, insp_lenient ? ParseMode::kLenient : ParseMode::kStrict);
        const StreamHeader& h = f.header;
        out << "format=1dp\n"
            << "version=" << int{h.version} << "\nflags=" << int{h.flags} << "\n"
            << "width=" << h.width << "\nheight=" << h.height << "\n"
            << "token_count=" << h.token_count << "\n"
            << "bits_per_token=" << int{h.bits_per_token} << "\n"
            << "model_id=" << format_model_id(h.model_id) << "\n"
            << "payload_bytes=" << payload_size(h.token_count, h.bits_per_token) << "\n"
            << "file_bytes=" << raw.size() << "\ntokens=";
        for (size_t i = 0; i < f.tokens.size(); ++i) out << (i ? "," : "") << f.tokens[i];
        out << "\n";
      } else {
        const LoadedCheckpoint ck = load_checkpoint(insp_file);
        const ModelConfig& mc = ck.model.config;
        out << "format=checkpoint\n"
            << "model_id=" << format_model_id(fingerprint(ck.model)) << "\n"
            << "step=" << ck.meta.step << "\nseed=" << ck.meta.seed << "\n"
            << "parameters=" << parameter_count(ck.model) << "\n"
            << "image_size=" << mc.image_size << "\n"
            << "n_latent_tokens=" << mc.n_latent_tokens << "\n"
            << "codebook_size=" << mc.codebook_size << "\n"
            << "bits_per_token=" << mc.bits_per_token() << "\n"
            << "codebook_usage=" << format_metric(codebook_usage_fraction(ck.model)) << "\n";
      }
    } else if (*synth) {
      write_synth_corpus(synth_out, synth_count, synth_size, o.seed_or(0), synth_classes);
      out << "images=" << synth_count << "\nout=" << synth_out.string() << "\n";
    } else if (*compare) {
      const std::vector<MethodMetrics> rows = compare_external(cmp_dirs, cmp_originals);
      const std::string csv = compare_csv(rows);
      write_text_atomic(cmp_out, csv);
      out << csv;
    }
  } catch (const Error& e) {
    error_line(err, to_string(e.kind()), e.what());
    return kExitRuntime;
  } catch (const fs::filesystem_error& e) {
    error_line(err, to_string(ErrorKind::kIo), e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    error_line(err, "internal", e.what());
    return kExitRuntime;
  }
  return 0;
}

}  // namespace onedp::cli

#endif  // ONEDP_CLI_HPP_
