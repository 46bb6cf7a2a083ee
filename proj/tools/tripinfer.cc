/*
 * Copyright 2026 The tripinfer Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line driver. Every subcommand reads the same INI config; stages
// exchange artifacts through the output directory.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "tripinfer/anchors.h"
#include "tripinfer/config.h"
#include "tripinfer/explain.h"
#include "tripinfer/features.h"
#include "tripinfer/gbdt.h"
#include "tripinfer/pipeline.h"
#include "tripinfer/synth.h"

namespace fs = std::filesystem;
using namespace tripinfer;
using namespace tripinfer::pipeline;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct options {
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> out;
  std::optional<unsigned> threads;
  std::string model{"job"};
};

run_config resolve(options const& o, bool require_config = true) {
  run_config c;
  if (o.config) {
    c = load_config(*o.config);
  } else if (require_config) {
    throw usage_error("--config is required");
  }
  if (o.seed) {
    c.seed = *o.seed;
    c.generator.seed = *o.seed;
  }
  if (o.out) {
    c.out = *o.out;
  }
  if (o.threads) {
    c.threads = *o.threads;
  }
  c.validate();
  fs::create_directories(c.out);
  return c;
}

std::ifstream open_artifact(run_config const& c, std::string const& name) {
  std::ifstream in{c.out / name, std::ios::binary};
  if (!in) {
    throw data_error("missing artifact " + (c.out / name).string() + "; run the earlier stage first");
  }
  return in;
}

gbdt::tree_ensemble load_model(run_config const& c, std::string const& name) {
  open_artifact(c, name);
  return gbdt::load(c.out / name);
}

void save_model(run_config const& c, std::string const& name, gbdt::tree_ensemble const& m) {
  write_file_atomic(c.out / name, gbdt::to_json(m) + "\n");
}

std::string socio_model_name(attribute a) {
  return "socio_model_" + std::string{kAttributeNames[static_cast<std::size_t>(a)]} + ".json";
}

purpose_models load_purpose_models(run_config const& c) {
  return {load_model(c, "purpose_model_1.json"), load_model(c, "purpose_model_2.json")};
}

socio_models load_socio_models(run_config const& c) {
  socio_models m;
  for (auto const a : kAttributes) {
    m.at(a) = load_model(c, socio_model_name(a));
  }
  return m;
}

// purposes.csv rows aligned with the card trips.
std::vector<purpose_assignment> load_assignments(run_config const& c, card_data const& card) {
  auto in = open_artifact(c, "purposes.csv");
  auto const keyed = parse_purposes(in);
  auto const seq = trip_sequence(card.trips);
  std::vector<purpose_assignment> out;
  out.reserve(card.trips.size());
  for (std::size_t i = 0; i < card.trips.size(); ++i) {
    auto const& t = card.trips[i];
    auto const it = keyed.find(trip_key{t.user_id, ingest::format_date(t.service_date), seq[i]});
    if (it == end(keyed)) {
      throw data_error("purposes.csv has no row for " + t.user_id + " trip " + std::to_string(seq[i]));
    }
    out.push_back(it->second);
  }
  if (keyed.size() != out.size()) {
    throw data_error("purposes.csv does not match the rides input");
  }
  return out;
}

void write_json(run_config const& c, std::string const& name, nlohmann::json const& j) {
  write_file_atomic(c.out / name, j.dump(2) + "\n");
}

void write_logs(run_config const& c, std::string const& name,
                std::vector<selftrain::iteration_record> const& log, gbdt::tree_ensemble const& m) {
  write_file_atomic(c.out / name, [&](std::ostream& out) { selftrain::write_log(out, log, m.class_names); });
}

void cmd_synth(options const& o) {
  auto const c = resolve(o, false);
  auto const d = synth::generate(c.generator, c.thread_count());
  synth::write_dataset(d, c.generator, c.out);
  std::printf("wrote %zu survey persons, %zu rides to %s\n", d.survey.size(), d.rides.size(),
              c.out.string().c_str());
}

void cmd_ingest(options const& o) {
  auto const c = resolve(o);
  auto const in = load_inputs(c);
  write_file_atomic(c.out / "rejections.csv",
                    [&](std::ostream& out) { ingest::write_rejections(out, in.rejections); });
  std::printf("accepted %zu rides, rejected %zu, survey persons %zu, POI stations %zu\n", in.rides.size(),
              in.rejections.size(), in.survey.size(), in.poi.size());
}

void cmd_anchors(options const& o) {
  auto const c = resolve(o);
  auto const in = load_inputs(c);
  auto const card = prepare_card(in.rides, c);
  write_file_atomic(c.out / "anchors.csv", [&](std::ostream& out) { anchors::write_anchors(out, card.anchors); });
  std::size_t anchored = 0;
  for (auto const& a : card.anchors) {
    anchored += a.anchored() ? 1 : 0;
  }
  std::printf("%zu trips, %zu users, %zu anchored\n", card.trips.size(), card.anchors.size(), anchored);
}

void cmd_train_purpose(options const& o) {
  auto const c = resolve(o);
  auto const in = load_inputs(c);
  auto const r = train_stage1(in.survey, in.poi, c);
  save_model(c, "purpose_model_1.json", r.models.model_1);
  save_model(c, "purpose_model_2.json", r.models.model_2);
  write_json(c, "stage1_report.json", r.report);
}

void cmd_selftrain_purpose(options const& o) {
  auto const c = resolve(o);
  auto const in = load_inputs(c);
  auto const card = prepare_card(in.rides, c);
  auto const r = selftrain_stage1(in.survey, card, in.poi, c);
  save_model(c, "purpose_model_1.json", r.models.model_1);
  save_model(c, "purpose_model_2.json", r.models.model_2);
  write_logs(c, "selftrain_purpose_1.csv", r.log_1, r.models.model_1);
  write_logs(c, "selftrain_purpose_2.csv", r.log_2, r.models.model_2);
}

void cmd_infer_purpose(options const& o) {
  auto const c = resolve(o);
  auto const in = load_inputs(c);
  auto const card = prepare_card(in.rides, c);
  auto const models = load_purpose_models(c);
  auto const a = stage1_purpose(card.trips, card.anchors, models, in.poi, c.thread_count());
  write_file_atomic(c.out / "purposes.csv", [&](std::ostream& out) { write_purposes(out, card.trips, a); });
}

void cmd_train_socio(options const& o) {
  auto const c = resolve(o);
  auto const in = load_inputs(c);
  auto const chains = survey_chain_features(in.survey, *in.city, c.max_trips);
  auto const r = train_stage2(chains, c);
  for (auto const a : kAttributes) {
    save_model(c, socio_model_name(a), r.models.at(a));
  }
  write_json(c, "stage2_report.json", r.report);
}

card_chains card_side(run_config const& c, inputs const& in) {
  auto const card = prepare_card(in.rides, c);
  auto const a = load_assignments(c, card);
  return card_chain_features(card, a, *in.city, c.max_trips, c.thread_count());
}

void cmd_selftrain_socio(options const& o) {
  auto const c = resolve(o);
  auto const in = load_inputs(c);
  auto const labeled = survey_chain_features(in.survey, *in.city, c.max_trips);
  auto const r = selftrain_stage2(labeled, card_side(c, in), c);
  for (auto const a : kAttributes) {
    save_model(c, socio_model_name(a), r.models.at(a));
    write_logs(c, "selftrain_" + std::string{kAttributeNames[static_cast<std::size_t>(a)]} + ".csv",
               r.logs.at(a), r.models.at(a));
  }
}

void cmd_infer_socio(options const& o) {
  auto const c = resolve(o);
  auto const in = load_inputs(c);
  auto const chains = card_side(c, in);
  auto const p = stage2_socio(chains, load_socio_models(c), c.thread_count());
  write_file_atomic(c.out / "day_predictions.csv",
                    [&](std::ostream& out) { write_day_predictions(out, chains, p); });
}

void cmd_vote(options const& o) {
  auto const c = resolve(o);
  auto in = open_artifact(c, "day_predictions.csv");
  auto const d = parse_day_predictions(in);
  auto const profiles = vote_profiles(d.chains, d.probabilities);
  write_file_atomic(c.out / "profiles.csv", [&](std::ostream& out) { write_profiles(out, profiles); });
}

void cmd_evaluate(options const& o) {
  auto const c = resolve(o);
  std::ifstream tf{c.truth, std::ios::binary};
  if (!tf) {
    throw data_error("cannot open truth file " + c.truth.string());
  }
  auto const truth = synth::parse_truth(tf);
  auto pf = open_artifact(c, "purposes.csv");
  auto const purposes = parse_purposes(pf);
  std::vector<profile> profiles;
  if (fs::exists(c.out / "profiles.csv")) {
    auto in = open_artifact(c, "profiles.csv");
    profiles = parse_profiles(in);
  }
  auto const report = evaluate_run(truth, purposes, profiles);
  write_json(c, "evaluation.json", report);
  std::cout << report.dump(2) << '\n';
}

void cmd_explain(options const& o) {
  auto const c = resolve(o);
  auto const in = load_inputs(c);
  gbdt::tree_ensemble model;
  matrix rows;
  explain::group_fn group;
  if (o.model == "purpose1" || o.model == "purpose2") {
    model = load_model(c, o.model == "purpose1" ? "purpose_model_1.json" : "purpose_model_2.json");
    rows = (o.model == "purpose1" ? model_1_data(in.survey, in.poi) : model_2_data(in.survey, in.poi)).x;
    group = features::trip_feature_group;
  } else {
    auto const a = parse_enum<attribute>(o.model, kAttributeNames);
    if (!a) {
      throw usage_error("--model must be one of purpose1, purpose2, age, job, income");
    }
    model = load_model(c, socio_model_name(*a));
    rows = survey_chain_features(in.survey, *in.city, c.max_trips).x;
    group = features::chain_feature_group;
  }
  auto const table = explain::mean_abs_shap(model, rows, group, c.thread_count());
  write_file_atomic(c.out / "attribution.csv",
                    [&](std::ostream& out) { explain::write_attribution(out, table, model.class_names); });
}

void cmd_run_all(options const& o) {
  auto const c = resolve(o);
  auto const s = run_all(c);
  std::printf("wrote %zu artifacts and manifest.json to %s\n", s.outputs.size(), c.out.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tripinfer: trip purpose and socio-economic inference from smart card data"};
  app.require_subcommand(0, 1);
  options o;
  bool print_defaults = false;
  app.add_flag("--print-defaults", print_defaults, "Print the default config and exit");

  struct command {
    void (*fn)(options const&);
    char const* help;
  };
  std::map<std::string, command> const commands{
      {"synth", {cmd_synth, "Write a synthetic fixture and its config"}},
      {"ingest", {cmd_ingest, "Parse and validate rides"}},
      {"anchors", {cmd_anchors, "Detect home and work anchors"}},
      {"train-purpose", {cmd_train_purpose, "Train the purpose teachers on the survey"}},
      {"selftrain-purpose", {cmd_selftrain_purpose, "Self-train the purpose models on card trips"}},
      {"infer-purpose", {cmd_infer_purpose, "Label card trips with a purpose"}},
      {"train-socio", {cmd_train_socio, "Train the attribute teachers on survey chains"}},
      {"selftrain-socio", {cmd_selftrain_socio, "Self-train the attribute models on card chains"}},
      {"infer-socio", {cmd_infer_socio, "Predict attributes per user-day"}},
      {"vote", {cmd_vote, "Aggregate day predictions into user profiles"}},
      {"evaluate", {cmd_evaluate, "Score outputs against truth.csv"}},
      {"explain", {cmd_explain, "Mean absolute tree Shapley values per feature"}},
      {"run-all", {cmd_run_all, "Run every step and write manifest.json"}},
  };
  std::map<CLI::App*, void (*)(options const&)> dispatch;
  for (auto const& [name, cmd] : commands) {
    auto* sub = app.add_subcommand(name, cmd.help);
    sub->add_option_function<std::string>("--config", [&](std::string const& p) { o.config = p; },
                                          "INI config file");
    sub->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t v) { o.seed = v; }, "Override the seed");
    sub->add_option_function<std::string>("--out", [&](std::string const& p) { o.out = p; }, "Output directory");
    sub->add_option_function<unsigned>("--threads", [&](unsigned v) { o.threads = v; },
                                       "Worker threads (0: machine default)");
    if (name == "explain") {
      sub->add_option("--model", o.model, "purpose1, purpose2, age, job or income")->capture_default_str();
    }
    dispatch[sub] = cmd.fn;
  }

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const& e) {
    auto const code = app.exit(e);
    if (code != 0 && dynamic_cast<CLI::ExtrasError const*>(&e) != nullptr) {
      std::cerr << app.help();
    }
    return code == 0 ? 0 : kExitUsage;
  }

  if (print_defaults) {
    std::cout << to_ini(run_config{});
    return 0;
  }
  auto const chosen = app.get_subcommands();
  if (chosen.empty()) {
    std::cerr << app.help();
    return kExitUsage;
  }
  try {
    dispatch.at(chosen.front())(o);
  } catch (usage_error const& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (data_error const& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (std::exception const& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return 0;
}
