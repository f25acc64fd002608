#include "dswe/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "dswe/util.hpp"

namespace dswe {

namespace {

struct SlotFill {
  std::string slot;
  std::string surface;
  std::size_t pos;  // offset in the instantiated string
};

std::string instantiate(const std::string& tmpl,
                        const std::map<std::string, std::vector<std::string>>& pools,
                        Rng& rng, std::vector<SlotFill>& fills) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      auto close = tmpl.find('}', i);
      if (close == std::string::npos)
        throw std::runtime_error("unterminated {slot} in template: " + tmpl);
      std::string name = tmpl.substr(i + 1, close - i - 1);
      auto it = pools.find(name);
      if (it == pools.end() || it->second.empty())
        throw std::runtime_error("template references unknown slot {" + name +
                                 "}");
      const std::string& pick =
          it->second[static_cast<std::size_t>(rng.below(it->second.size()))];
      fills.push_back({name, pick, out.size()});
      out += pick;
      i = close + 1;
    } else {
      out.push_back(tmpl[i]);
      ++i;
    }
  }
  return out;
}

// Replace one surface with its misspelled form. Slot fills that have a
// misspelling entry take priority (they are the rule-relevant words);
// otherwise any literal occurrence of a misspellable key is fair game.
bool apply_misspelling(std::string& text, const std::vector<SlotFill>& fills,
                       const std::map<std::string, std::string>& table,
                       Rng& rng) {
  std::vector<std::pair<std::size_t, const std::string*>> candidates;
  for (const auto& f : fills) {
    auto it = table.find(f.surface);
    if (it != table.end()) candidates.emplace_back(f.pos, &it->first);
  }
  if (candidates.empty()) {
    for (const auto& [key, value] : table) {
      auto pos = text.find(key);
      if (pos != std::string::npos) candidates.emplace_back(pos, &key);
    }
    std::sort(candidates.begin(), candidates.end());
  }
  if (candidates.empty()) return false;
  auto [pos, key] =
      candidates[static_cast<std::size_t>(rng.below(candidates.size()))];
  text.replace(pos, key->size(), table.at(*key));
  return true;
}

}  // namespace

TemplateBank default_template_bank() {
  TemplateBank b;
  b.class_templates["fracture"] = {
      "imaging of the {side} hip shows a {mod} of the {kw}",
      "there is an acute {mod} involving the {kw}",
      "findings consistent with a {mod} through the {kw}",
      "interval development of a {mod} at the {kw}",
  };
  b.cross_sentence_templates["fracture"] = {
      "a {mod} is identified on the {side} view. it extends into the {kw}",
      "there is evidence of an acute {mod}. the {kw} is involved",
      "impression a new {mod} is present. alignment at the {kw} is abnormal",
  };
  b.class_templates["negative"] = {
      "the {kw} appears intact",
      "no acute abnormality about the {kw}",
      "{finding} about the {side} hip without acute process",
      "a {mod} of the {distal} is noted",
      "unremarkable study of the {side} hip",
      "the {kw} is preserved with no {finding}",
  };
  b.trap_templates["negative"] = {
      "no evidence of a {mod} at the {kw}",
      "no acute {mod} of the {kw} is identified",
      "the {kw} shows no {mod} or other abnormality",
  };
  b.slot_pools["kw"] = {"femoral neck", "intertrochanteric",
                        "greater trochanter", "subcapital",
                        "basilar femoral neck"};
  b.slot_pools["mod"] = {"fracture", "fractures", "fx"};
  b.slot_pools["side"] = {"left", "right"};
  b.slot_pools["distal"] = {"wrist", "ankle", "rib", "shoulder"};
  b.slot_pools["finding"] = {"swelling", "effusion", "osteopenia"};
  b.misspellings = {
      {"fracture", "fractrue"},
      {"fractures", "fracutres"},
      {"femoral neck", "femoral nek"},
      {"intertrochanteric", "intertrochantric"},
      {"greater trochanter", "greater trochantor"},
      {"subcapital", "subcaptial"},
      {"basilar femoral neck", "basilar femoral nek"},
      {"wrist", "wirst"},
      {"ankle", "ankel"},
      {"rib", "ribb"},
      {"shoulder", "sholder"},
      {"swelling", "sweling"},
      {"effusion", "effussion"},
      {"osteopenia", "osteopena"},
      {"unremarkable", "unremarkble"},
  };
  b.filler = {
      "the patient tolerated the examination well",
      "comparison is made with the prior study",
      "clinical correlation is recommended",
      "no additional findings are appreciated today",
      "technique standard portable views were obtained",
      "the remaining osseous structures are stable",
      "soft tissues are within normal limits",
      "report dictated and reviewed electronically",
  };
  return b;
}

TemplateBank load_template_bank(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open template bank: " + path);
  nlohmann::json j;
  in >> j;
  TemplateBank b;
  for (auto& [label, spec] : j.at("classes").items()) {
    b.class_templates[label] =
        spec.at("templates").get<std::vector<std::string>>();
    if (spec.contains("cross_sentence"))
      b.cross_sentence_templates[label] =
          spec["cross_sentence"].get<std::vector<std::string>>();
    if (spec.contains("trap"))
      b.trap_templates[label] = spec["trap"].get<std::vector<std::string>>();
  }
  for (auto& [slot, pool] : j.at("slots").items())
    b.slot_pools[slot] = pool.get<std::vector<std::string>>();
  if (j.contains("misspellings"))
    b.misspellings = j["misspellings"].get<std::map<std::string, std::string>>();
  if (j.contains("filler"))
    b.filler = j["filler"].get<std::vector<std::string>>();
  return b;
}

SynthResult synth_generate(const SynthConfig& cfg) {
  for (double r : {cfg.misspell_rate, cfg.cross_sentence_rate,
                   cfg.negation_trap_rate}) {
    if (r < 0.0 || r > 1.0)
      throw std::invalid_argument("perturbation rates must be in [0,1]");
  }
  double prior_sum = 0.0;
  for (const auto& [label, p] : cfg.class_priors) {
    if (p < 0.0) throw std::invalid_argument("negative class prior");
    prior_sum += p;
    if (p > 0.0) {
      auto it = cfg.bank.class_templates.find(label);
      if (it == cfg.bank.class_templates.end() || it->second.empty())
        throw std::runtime_error("no templates for class \"" + label +
                                 "\" with positive prior");
    }
  }
  if (std::abs(prior_sum - 1.0) > 1e-9)
    throw std::invalid_argument("class priors must sum to 1");

  Rng rng(cfg.seed);
  SynthResult out;
  out.docs.reserve(cfg.n_docs);
  out.perturbations.reserve(cfg.n_docs);

  const double m = cfg.misspell_rate;
  const double c = cfg.cross_sentence_rate;
  const double t = cfg.negation_trap_rate;

  for (std::size_t n = 0; n < cfg.n_docs; ++n) {
    // class draw from the prior CDF (map order is sorted, hence stable)
    double u = rng.unit();
    std::string label;
    double acc = 0.0;
    for (const auto& [lbl, p] : cfg.class_priors) {
      acc += p;
      label = lbl;
      if (u < acc) break;
    }

    double up = rng.unit();
    std::string candidate = "none";
    if (up < m)
      candidate = "misspell";
    else if (up < m + c)
      candidate = "cross_sentence";
    else if (up < m + c + t)
      candidate = "negation_trap";

    const std::vector<std::string>* tmpls = &cfg.bank.class_templates.at(label);
    std::string kind = "none";
    if (candidate == "cross_sentence") {
      auto it = cfg.bank.cross_sentence_templates.find(label);
      if (it != cfg.bank.cross_sentence_templates.end() && !it->second.empty()) {
        tmpls = &it->second;
        kind = "cross_sentence";
      }
    } else if (candidate == "negation_trap") {
      auto it = cfg.bank.trap_templates.find(label);
      if (it != cfg.bank.trap_templates.end() && !it->second.empty()) {
        tmpls = &it->second;
        kind = "negation_trap";
      }
    }

    std::vector<SlotFill> fills;
    std::string key = instantiate(
        (*tmpls)[static_cast<std::size_t>(rng.below(tmpls->size()))],
        cfg.bank.slot_pools, rng, fills);
    if (candidate == "misspell" &&
        apply_misspelling(key, fills, cfg.bank.misspellings, rng)) {
      kind = "misspell";
    }

    std::string text;
    std::size_t n_pre = cfg.bank.filler.empty() ? 0 : rng.below(2);
    std::size_t n_post = cfg.bank.filler.empty() ? 0 : rng.below(2);
    for (std::size_t i = 0; i < n_pre; ++i) {
      text += cfg.bank.filler[static_cast<std::size_t>(
          rng.below(cfg.bank.filler.size()))];
      text += ". ";
    }
    text += key;
    for (std::size_t i = 0; i < n_post; ++i) {
      text += ". ";
      text += cfg.bank.filler[static_cast<std::size_t>(
          rng.below(cfg.bank.filler.size()))];
    }
    text += ".";

    char idbuf[16];
    std::snprintf(idbuf, sizeof(idbuf), "%06zu", n);
    out.docs.push_back(Document{cfg.id_prefix + idbuf, std::move(text), label});
    out.perturbations.push_back(kind);
  }
  return out;
}

}  // namespace dswe
