#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "figa/attack.hpp"
#include "figa/data.hpp"
#include "figa/models.hpp"

namespace figa {

struct WebPage {
    std::string url;
    std::string html;
};

inline constexpr std::size_t kWebFeatureCount = 52;

// Column order of every web feature vector and of the `extract` CSV.
inline constexpr std::array<std::string_view, kWebFeatureCount> kWebFeatureNames = {
    "href",           "javascript",      "text_in_body",     "no_www",
    "images",         "meta",            "no_digits",        "subdomain_len",
    "alph_digit_ratio", "url_len",       "len_freeurl",      "no_dir",
    "no_alphanumeric", "hyphens_in_path", "longest_token",   "suspicious_words",
    "len_fqdn",       "protocol",        "passwdfield",      "no_vowels",
    "no_alpha",       "no_constants",    "no_dots",          "host_dig_let_ratio",
    "iframes",        "forms",           "length_of_domains", "dots_freeurl",
    "relativeforms",  "vowel_constant_ratio", "hidden_text", "longest_token_hostname",
    "dig_in_hostname", "no_dash",        "redirects",        "url_of_anchor",
    "submit_to_mail", "rightclick_disabled", "no_special_sym", "title",
    "no_percent",     "no_eq",           "no_ques",          "popup",
    "insecureforms",  "no_http",         "abnormalforms",    "onmouseover",
    "no_at",          "userprompt",      "no_dollar",        "SFH"};

// Features with an HTML generator; the default addable set.
inline constexpr std::array<std::string_view, 9> kInjectableFeatures = {
    "href", "javascript", "images", "meta", "forms", "iframes", "hidden_text", "redirects", "submit_to_mail"};

std::size_t web_feature_index(std::string_view name);

struct WebFeatureVector {
    std::array<double, kWebFeatureCount> values{};

    double operator[](std::size_t i) const { return values.at(i); }
    double& operator[](std::size_t i) { return values.at(i); }
    double at(std::string_view name) const { return values[web_feature_index(name)]; }
    std::span<const double> span() const { return values; }
    friend bool operator==(const WebFeatureVector&, const WebFeatureVector&) = default;
};

// Schema of the 52 web features: ratios continuous, everything else discrete.
// `addable` defaults to kInjectableFeatures.
FeatureSchema web_feature_schema(std::span<const std::string> addable = {});

// Pure function of (url, html). Counting rules: docs/web_features.md.
WebFeatureVector extract_features(const WebPage& page);

// Non-negative integer additions, keyed by web feature index.
struct InjectionPlan {
    std::map<std::size_t, long> additions;

    bool empty() const noexcept { return additions.empty(); }
    long operator[](std::string_view name) const;
};

// adversarial - original per feature. Addable features may only grow; every
// other feature must be unchanged. Anything else is infeasible.
InjectionPlan plan_injection(const WebFeatureVector& original, const WebFeatureVector& adversarial,
                             const FeatureSchema& schema);

// Appends the planned elements to one trailing display:none container (meta
// tags go into <head>). The original bytes are kept; an empty plan returns
// the page unchanged.
WebPage inject(const WebPage& page, const InjectionPlan& plan);

struct ProblemSpaceResult {
    WebPage page;  // forged page
    WebFeatureVector original;
    WebFeatureVector adversarial;  // feature-space target from the attack
    WebFeatureVector reextracted;  // features of the forged page
    InjectionPlan plan;
    std::vector<std::size_t> selected;
    double score_before = 0.0;
    double score_after = 0.0;
    int label_before = 0;
    int label_after = 0;
};

// extract -> perturb (addable, positive-direction features only) ->
// plan_injection -> inject -> re-extract -> classify.
ProblemSpaceResult problem_space_attack(const WebPage& page, const FeatureRanking& ranking,
                                        const DirectionVector& direction, const ScalerState& scaler,
                                        const AttackConfig& config, const FeatureSchema& schema, const Model& model);

// Reads `<stem>.html`; the URL comes from `<stem>.url` when present, otherwise
// from the filename (`example.com_login.html` -> `http://example.com/login`).
WebPage load_page(const std::filesystem::path& html_path);
std::string url_from_filename(std::string_view stem);

}  // namespace figa
