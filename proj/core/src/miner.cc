#include <algorithm>

#include "agraph/answer_graph.h"
#include "agraph/planner.h"
#include "agraph/testkit.h"

namespace agraph {

void to_json(nlohmann::json& j, const MinedQuery& mined) {
  j = nlohmann::json{{"template", mined.template_name},
                     {"labels", mined.labels},
                     {"embeddings", mined.embeddings},
                     {"agTotal", mined.ag_total}};
}

namespace {

struct Meeting {
  std::size_t earlier = 0;  // placeholder assigned first
  std::size_t later = 0;
  JoinType join = JoinType::kSS;  // roles in (earlier, later) order
};

// Every (edge, edge) contact over a shared variable, keyed by the later
// placeholder so the check runs as soon as both labels are known.
std::vector<std::vector<Meeting>> meetings(const Template& tmpl) {
  std::vector<std::vector<Meeting>> out(tmpl.placeholders);
  for (std::size_t i = 0; i < tmpl.edges.size(); ++i) {
    for (std::size_t j = 0; j < tmpl.edges.size(); ++j) {
      const auto& a = tmpl.edges[i];
      const auto& b = tmpl.edges[j];
      if (i == j || a.placeholder > b.placeholder ||
          (a.placeholder == b.placeholder && i > j)) {
        continue;
      }
      auto add = [&](const std::string& na, Role ra, const std::string& nb, Role rb) {
        if (na == nb && na.starts_with('?')) {
          out[b.placeholder].push_back({a.placeholder, b.placeholder, join_type(ra, rb)});
        }
      };
      add(a.src, Role::kSubject, b.src, Role::kSubject);
      add(a.src, Role::kSubject, b.dst, Role::kObject);
      add(a.dst, Role::kObject, b.src, Role::kSubject);
      add(a.dst, Role::kObject, b.dst, Role::kObject);
    }
  }
  return out;
}

class Miner {
 public:
  Miner(const Template& tmpl, const TripleStore& store, const Catalog& catalog,
        std::size_t limit, const MinerOptions& options)
      : tmpl_(tmpl), store_(store), catalog_(catalog), limit_(limit),
        options_(options), meetings_(meetings(tmpl)), chosen_(tmpl.placeholders) {
    for (const auto& [label, gram] : catalog.one_grams()) {
      if (gram.count > 0) labels_.push_back(&gram);
    }
    std::sort(labels_.begin(), labels_.end(), [](const OneGram* a, const OneGram* b) {
      if (a->count != b->count) return a->count > b->count;
      return a->label < b->label;
    });
  }

  std::vector<MinedQuery> run() {
    if (limit_ > 0) assign(0);
    return std::move(out_);
  }

 private:
  void assign(std::size_t k) {
    if (out_.size() >= limit_) return;
    if (k == tmpl_.placeholders) {
      evaluate();
      return;
    }
    for (const OneGram* gram : labels_) {
      chosen_[k] = gram->label;
      if (options_.prune && !compatible(k)) continue;
      assign(k + 1);
      if (out_.size() >= limit_) return;
    }
  }

  bool compatible(std::size_t k) const {
    for (const Meeting& m : meetings_[k]) {
      if (catalog_.key_count(chosen_[m.earlier], chosen_[m.later], m.join) == 0) {
        return false;
      }
    }
    return true;
  }

  void evaluate() {
    const ConjunctiveQuery query = instantiate(tmpl_, chosen_);
    const EdgePlan plan = plan_edgifier(query, catalog_);
    const AnswerGraph ag = generate_answer_graph(query, plan, nullptr, store_);
    const std::uint64_t n = count_embeddings(ag);
    if (n == 0) return;
    out_.push_back({tmpl_.name, chosen_, n, ag.total_pairs()});
  }

  const Template& tmpl_;
  const TripleStore& store_;
  const Catalog& catalog_;
  std::size_t limit_;
  MinerOptions options_;
  std::vector<std::vector<Meeting>> meetings_;
  std::vector<const OneGram*> labels_;
  std::vector<std::string> chosen_;
  std::vector<MinedQuery> out_;
};

}  // namespace

std::vector<MinedQuery> mine_queries(const Template& tmpl, const TripleStore& store,
                                     const Catalog& catalog, std::size_t limit,
                                     const MinerOptions& options) {
  return Miner(tmpl, store, catalog, limit, options).run();
}

}  // namespace agraph
