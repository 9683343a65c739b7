#include "evocounsel/run/config.hpp"

#include <set>

#include "evocounsel/common/digest.hpp"
#include "evocounsel/common/errors.hpp"
#include "evocounsel/common/files.hpp"

namespace evocounsel::run {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Small reader that records field-path errors instead of throwing on the first.
class Reader {
 public:
  Reader(const json& j, std::string path, std::vector<std::string>& issues)
      : j_(j), path_(std::move(path)), issues_(issues) {
    if (!j_.is_object()) issues_.push_back(where("") + "must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.is_object() || !j_.contains(key) || j_[key].is_null()) return;
    const json& v = j_[key];
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) return bad(key, "boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) return bad(key, "string");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) return bad(key, "number");
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) return bad(key, "non-negative integer");
    } else {
      if (!v.is_number_integer()) return bad(key, "integer");
    }
    out = v.get<T>();
  }

  const json* object(const char* key) {
    seen_.insert(key);
    if (!j_.is_object() || !j_.contains(key) || j_[key].is_null()) return nullptr;
    return &j_[key];
  }

  std::string child(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void reject_unknown() {
    if (!j_.is_object()) return;
    for (const auto& [k, _] : j_.items())
      if (!seen_.contains(k)) issues_.push_back(where(k) + "unknown field");
  }

 private:
  std::string where(const std::string& key) const {
    std::string p = path_;
    if (!key.empty()) p = p.empty() ? key : p + "." + key;
    return (p.empty() ? std::string("<root>") : p) + ": ";
  }
  void bad(const char* key, const char* want) { issues_.push_back(where(key) + "expected " + want); }

  const json& j_;
  std::string path_;
  std::vector<std::string>& issues_;
  std::set<std::string> seen_;
};

std::string resolve(const std::string& p, const fs::path& base) {
  if (p.empty() || base.empty()) return p;
  fs::path path(p);
  if (path.is_absolute()) return p;
  return fs::weakly_canonical(base / path).string();
}

json backend_json(const BackendConfig& b) {
  return {{"kind", b.kind},         {"script", b.script},     {"endpoint", b.endpoint},
          {"model", b.model},       {"api_key_env", b.api_key_env}, {"embedding_model", b.embedding_model},
          {"timeout_s", b.timeout_s}, {"max_retries", b.max_retries}, {"parallelism", b.parallelism}};
}

void read_backend(const json* j, const std::string& path, BackendConfig& b, std::vector<std::string>& issues,
                  const fs::path& base) {
  if (!j) {
    issues.push_back(path + ": missing backend");
    return;
  }
  Reader r(*j, path, issues);
  r.get("kind", b.kind);
  r.get("script", b.script);
  r.get("endpoint", b.endpoint);
  r.get("model", b.model);
  r.get("api_key_env", b.api_key_env);
  r.get("embedding_model", b.embedding_model);
  r.get("timeout_s", b.timeout_s);
  r.get("max_retries", b.max_retries);
  r.get("parallelism", b.parallelism);
  r.reject_unknown();
  b.script = resolve(b.script, base);
}

void check_backend(const BackendConfig& b, const std::string& path, std::vector<std::string>& issues) {
  if (b.kind == "scripted") {
    if (b.script.empty()) issues.push_back(path + ".script: required for a scripted backend");
  } else if (b.kind == "http") {
    if (b.endpoint.empty()) issues.push_back(path + ".endpoint: required for an http backend");
    if (b.model.empty()) issues.push_back(path + ".model: required for an http backend");
  } else {
    issues.push_back(path + ".kind: must be 'scripted' or 'http'");
  }
  if (b.timeout_s <= 0) issues.push_back(path + ".timeout_s: must be > 0");
  if (b.max_retries < 0) issues.push_back(path + ".max_retries: must be >= 0");
  if (b.parallelism < 1) issues.push_back(path + ".parallelism: must be >= 1");
}

}  // namespace

std::vector<std::string> RunConfig::validate() const {
  std::vector<std::string> issues;
  check_backend(counselor, "backends.counselor", issues);
  check_backend(client, "backends.client", issues);
  check_backend(judge, "backends.judge", issues);
  check_backend(extractor, "backends.extractor", issues);
  if (n_rollouts < 1) issues.push_back("n_rollouts: must be >= 1");
  if (sessions < 0) issues.push_back("sessions: must be >= 0");
  if (turn_limit < 1) issues.push_back("turn_limit: must be >= 1");
  if (similarity_low < 0 || similarity_low > 1) issues.push_back("similarity.low: must be within [0, 1]");
  if (similarity_high < 0 || similarity_high > 1) issues.push_back("similarity.high: must be within [0, 1]");
  if (!(similarity_low < similarity_high)) issues.push_back("similarity: low must be < high");
  if (similarity_metric != "token_set_cosine" && similarity_metric != "embedding")
    issues.push_back("similarity.metric: must be 'token_set_cosine' or 'embedding'");
  if (similarity_metric == "embedding" && extractor.kind != "http")
    issues.push_back("similarity.metric: 'embedding' needs an http extractor backend");
  if (max_repairs < 0) issues.push_back("max_repairs: must be >= 0");
  if (summary_cap < 1) issues.push_back("summary_cap: must be >= 1");
  if (max_objectives < 1) issues.push_back("max_objectives: must be >= 1");
  if (parallelism < 1) issues.push_back("parallelism: must be >= 1");
  const std::pair<const char*, double> temps[] = {
      {"plan", temperatures.plan},     {"retrieval", temperatures.retrieval}, {"generation", temperatures.generation},
      {"client", temperatures.client}, {"judge", temperatures.judge},         {"extraction", temperatures.extraction}};
  for (const auto& [name, v] : temps)
    if (v < 0) issues.push_back(std::string("temperatures.") + name + ": must be >= 0");
  return issues;
}

json RunConfig::to_json() const {
  return {{"run_id", run_id},
          {"backends",
           {{"counselor", backend_json(counselor)},
            {"client", backend_json(client)},
            {"judge", backend_json(judge)},
            {"extractor", backend_json(extractor)}}},
          {"n_rollouts", n_rollouts},
          {"sessions", sessions},
          {"turn_limit", turn_limit},
          {"similarity", {{"low", similarity_low}, {"high", similarity_high}, {"metric", similarity_metric}}},
          {"rubric", rubric},
          {"client", {{"cards", cards}, {"card_id", card_id}}},
          {"seed_tree", seed_tree},
          {"seed", seed},
          {"flags", flags.to_json()},
          {"max_repairs", max_repairs},
          {"summary_cap", summary_cap},
          {"max_objectives", max_objectives},
          {"parallelism", parallelism},
          {"history_masking", history_masking},
          {"strict_judge", strict_judge},
          {"temperatures",
           {{"plan", temperatures.plan},
            {"retrieval", temperatures.retrieval},
            {"generation", temperatures.generation},
            {"client", temperatures.client},
            {"judge", temperatures.judge},
            {"extraction", temperatures.extraction}}}};
}

RunConfig RunConfig::from_json(const json& j, const fs::path& base) {
  RunConfig c;
  std::vector<std::string> issues;
  Reader r(j, "", issues);
  r.get("run_id", c.run_id);
  if (const json* b = r.object("backends")) {
    Reader rb(*b, "backends", issues);
    read_backend(rb.object("counselor"), "backends.counselor", c.counselor, issues, base);
    read_backend(rb.object("client"), "backends.client", c.client, issues, base);
    read_backend(rb.object("judge"), "backends.judge", c.judge, issues, base);
    read_backend(rb.object("extractor"), "backends.extractor", c.extractor, issues, base);
    rb.reject_unknown();
  } else {
    issues.push_back("backends: required");
  }
  r.get("n_rollouts", c.n_rollouts);
  r.get("sessions", c.sessions);
  r.get("turn_limit", c.turn_limit);
  if (const json* s = r.object("similarity")) {
    Reader rs(*s, "similarity", issues);
    rs.get("low", c.similarity_low);
    rs.get("high", c.similarity_high);
    rs.get("metric", c.similarity_metric);
    rs.reject_unknown();
  }
  r.get("rubric", c.rubric);
  if (const json* cl = r.object("client")) {
    Reader rc(*cl, "client", issues);
    rc.get("cards", c.cards);
    rc.get("card_id", c.card_id);
    rc.reject_unknown();
  }
  r.get("seed_tree", c.seed_tree);
  r.get("seed", c.seed);
  if (const json* f = r.object("flags")) {
    Reader rf(*f, "flags", issues);
    rf.get("no_mape", c.flags.no_mape);
    rf.get("no_see", c.flags.no_see);
    rf.get("no_rie", c.flags.no_rie);
    rf.reject_unknown();
  }
  r.get("max_repairs", c.max_repairs);
  r.get("summary_cap", c.summary_cap);
  r.get("max_objectives", c.max_objectives);
  r.get("parallelism", c.parallelism);
  r.get("history_masking", c.history_masking);
  r.get("strict_judge", c.strict_judge);
  if (const json* t = r.object("temperatures")) {
    Reader rt(*t, "temperatures", issues);
    rt.get("plan", c.temperatures.plan);
    rt.get("retrieval", c.temperatures.retrieval);
    rt.get("generation", c.temperatures.generation);
    rt.get("client", c.temperatures.client);
    rt.get("judge", c.temperatures.judge);
    rt.get("extraction", c.temperatures.extraction);
    rt.reject_unknown();
  }
  r.get("output_dir", c.output_dir);
  r.reject_unknown();

  c.rubric = resolve(c.rubric, base);
  c.cards = resolve(c.cards, base);
  c.seed_tree = resolve(c.seed_tree, base);
  c.output_dir = resolve(c.output_dir, base);
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return c;
}

std::string RunConfig::digest() const { return json_digest(to_json()); }

std::string RunConfig::effective_run_id() const {
  if (!run_id.empty()) return run_id;
  return "run-" + digest().substr(0, 12);
}

RunConfig load_config(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw ValidationError({"config: no such file " + path.string()});
  const json j = files::read_json(path);
  RunConfig c = RunConfig::from_json(j, fs::absolute(path).parent_path());
  if (auto issues = c.validate(); !issues.empty()) throw ValidationError(std::move(issues));
  return c;
}

void apply_scripted_dir(RunConfig& config, const fs::path& dir) {
  const fs::path base = fs::weakly_canonical(fs::absolute(dir));
  auto point = [&](BackendConfig& b, const char* role) {
    b.kind = "scripted";
    b.script = (base / (std::string(role) + ".json")).string();
  };
  point(config.counselor, "counselor");
  point(config.client, "client");
  point(config.judge, "judge");
  point(config.extractor, "extractor");
}

}  // namespace evocounsel::run
