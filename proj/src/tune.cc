/*
 * Copyright 2026 The lifefuse Authors.
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

#include "lifefuse/tune.h"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "lifefuse/csv.h"
#include "lifefuse/error.h"
#include "lifefuse/parallel.h"

namespace lifefuse {

using nlohmann::json;

json ParamRange::Sample(Rng& rng) const {
  switch (kind) {
    case Kind::kInt: {
      const auto lo = static_cast<std::int64_t>(low);
      const auto span = static_cast<std::uint64_t>(static_cast<std::int64_t>(high) - lo) + 1;
      return lo + static_cast<std::int64_t>(rng.UniformIndex(span));
    }
    case Kind::kReal: {
      if (!(high > low)) return low;
      const double v = log ? std::exp(rng.Uniform(std::log(low), std::log(high)))
                           : rng.Uniform(low, high);
      return std::clamp(v, low, high);
    }
    case Kind::kChoice:
      return choices[rng.UniformIndex(choices.size())];
  }
  return nullptr;
}

namespace {

void Require(bool ok, const std::string& what) {
  if (!ok) Fail(ErrorCode::kInvalidConfig, what);
}

ParamRange ParseRange(const std::string& name, const json& j) {
  ParamRange r;
  r.name = name;
  const auto type = j.at("type").get<std::string>();
  if (type == "int" || type == "real") {
    r.kind = type == "int" ? ParamRange::Kind::kInt : ParamRange::Kind::kReal;
    r.low = j.at("low").get<double>();
    r.high = j.at("high").get<double>();
    Require(std::isfinite(r.low) && std::isfinite(r.high),
            "range '" + name + "' bounds must be finite");
    Require(r.low <= r.high, "range '" + name + "' needs low <= high");
    if (r.kind == ParamRange::Kind::kInt) {
      Require(r.low == std::floor(r.low) && r.high == std::floor(r.high),
              "int range '" + name + "' needs integer bounds");
    } else {
      r.log = j.contains("log") ? j.at("log").get<bool>()
                                : r.low > 0.0 && r.high / r.low >= 100.0;
      Require(!r.log || r.low > 0.0,
              "log range '" + name + "' needs a positive lower bound");
    }
  } else if (type == "choice") {
    r.kind = ParamRange::Kind::kChoice;
    for (const auto& v : j.at("values")) r.choices.push_back(v);
    Require(!r.choices.empty(), "choice '" + name + "' has no values");
  } else {
    Fail(ErrorCode::kInvalidConfig,
         "range '" + name + "' has unknown type '" + type + "'");
  }
  return r;
}

LearnerSpec SpecFor(const std::string& family, const json& config) {
  return LearnerSpec::FromJson({{"kind", family}, {"params", config}});
}

}  // namespace

SearchSpace SearchSpace::FromJson(const json& j) {
  try {
    Require(j.is_object(), "search space must be a JSON object");
    SearchSpace space;
    space.family = j.at("family").get<std::string>();
    if (j.contains("base")) space.base = j.at("base");
    Require(space.base.is_object(), "search space 'base' must be an object");
    if (j.contains("params")) {
      for (const auto& [name, range] : j.at("params").items()) {
        space.params.push_back(ParseRange(name, range));
      }
    }
    // Family and base must be valid, and every name a parameter of the family.
    const json known = SpecFor(space.family, space.base).ToJson().at("params");
    for (const auto& [name, value] : space.base.items()) {
      Require(known.contains(name), "'" + name + "' is not a " + space.family + " parameter");
    }
    for (const auto& p : space.params) {
      Require(known.contains(p.name), "'" + p.name + "' is not a " + space.family + " parameter");
    }
    return space;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidConfig, std::string("search space: ") + e.what());
  }
}

json SearchSpace::Sample(Rng& rng) const {
  json config = base;
  for (const auto& p : params) config[p.name] = p.Sample(rng);
  return config;
}

SearchResult RandomSearch(const SearchSpace& space, const DataTable& table,
                          const SplitSpec& split, int trials,
                          std::uint64_t seed) {
  if (trials < 1) Fail(ErrorCode::kInvalidArgument, "trials must be >= 1");
  SearchResult result;
  result.trials.resize(trials);
  ParallelFor(static_cast<std::size_t>(trials), [&](std::size_t t) {
    TrialRecord& rec = result.trials[t];
    rec.index = static_cast<int>(t);
    rec.seed = DeriveSeed(seed, {t});
    Rng rng(rec.seed);
    rec.config = space.Sample(rng);
    try {
      const auto report =
          CrossValidate({space.family, SpecFor(space.family, rec.config)},
                        table, split);
      rec.folds = report.models[0].folds;
      rec.objective = report.models[0].r2.mean;
      if (!std::isfinite(rec.objective)) {
        rec.failed = true;
        rec.error = "non-finite objective";
      }
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.error = e.what();
    }
  });
  const TrialRecord* best = nullptr;
  for (const auto& rec : result.trials) {
    if (rec.failed) continue;
    if (best == nullptr || rec.objective > best->objective) best = &rec;
  }
  if (best == nullptr) {
    Fail(ErrorCode::kAllTrialsFailed,
         "all " + std::to_string(trials) +
             " trials failed; first error: " + result.trials[0].error);
  }
  result.best = *best;
  return result;
}

void WriteTrialsCsv(const std::vector<TrialRecord>& trials, std::ostream& out) {
  out << "trial,params,objective,status\n";
  for (const auto& rec : trials) {
    out << rec.index << ',' << csv::Quote(rec.config.dump()) << ','
        << (rec.failed ? std::string("nan") : csv::FormatDouble(rec.objective))
        << ',' << csv::Quote(rec.failed ? "failed: " + rec.error : "ok") << '\n';
  }
}

json BestToJson(const SearchSpace& space, const TrialRecord& best) {
  json folds = json::array();
  for (const auto& f : best.folds) {
    folds.push_back({{"mae", f.mae}, {"rmse", f.rmse}, {"r2", f.r2}});
  }
  return {{"family", space.family},
          {"spec", SpecFor(space.family, best.config).ToJson()},
          {"trial", best.index},
          {"seed", best.seed},
          {"params", best.config},
          {"objective", best.objective},
          {"folds", folds}};
}

}  // namespace lifefuse
