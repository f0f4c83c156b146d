#include "bonsai/sampler.hpp"

#include <cassert>

namespace bonsai {

double leaf_probability(int expansions_so_far, int depth_bound) {
  return static_cast<double>(expansions_so_far + 1) / static_cast<double>(depth_bound + 1);
}

namespace {

// Resolves name references of a detached symbol against g (symbols taken from
// a finalized grammar already carry their ids).
void resolve_against(Symbol& s, const Grammar& g) {
  if (s.kind == Symbol::Kind::NonTerminal && s.ref < 0) {
    if (g.nonterminal_ids.count(s.text)) {
      s.ref = g.nonterminal_ids.at(s.text);
    } else if (g.ident_class_ids.count(s.text)) {
      s.kind = Symbol::Kind::Ident;
      s.ref = g.ident_class_ids.at(s.text);
    } else {
      throw GrammarError("undefined nonterminal '" + s.text + "'");
    }
  } else if (s.kind == Symbol::Kind::Ident && s.ref < 0) {
    s.ref = g.ident_class_ids.at(s.text);
  }
  for (Symbol& b : s.body) resolve_against(b, g);
}

class Sampler {
 public:
  Sampler(const Grammar& g, const SizeBounds& b, ChoiceSource& src)
      : g_(g), b_(b), src_(src), chain_(g.alts_by_id.size(), 0) {}

  TreeNode sample_symbol(const Symbol& s) {
    switch (s.kind) {
      case Symbol::Kind::Fixed:
      case Symbol::Kind::Ident:
        return concretize(s);
      case Symbol::Kind::Repetition:
        return repetition(s.body);
      case Symbol::Kind::NonTerminal:
        return nonterminal(s);
    }
    assert(false);
    return {};
  }

  TreeNode concretize(const Symbol& s) {
    TreeNode node;
    if (s.kind == Symbol::Kind::Fixed) {
      node.kind = TreeNode::Kind::Fixed;
      node.text = s.text;
      return node;
    }
    node.kind = TreeNode::Kind::Ident;
    node.name = s.text;
    node.pool_index =
        static_cast<int>(src_.uniform(static_cast<uint64_t>(b_.max_idents)));
    node.text = g_.pool_value(s.ref, node.pool_index);
    out_.push_back({Choice::Tag::IdentIndex, node.pool_index, s.text, false});
    return node;
  }

  TreeNode repetition(const std::vector<Symbol>& body) {
    TreeNode node;
    node.kind = TreeNode::Kind::Repetition;
    node.rep_count =
        static_cast<int>(src_.uniform(static_cast<uint64_t>(b_.max_items) + 1));
    out_.push_back({Choice::Tag::RepCount, node.rep_count, "", false});
    node.children.reserve(static_cast<size_t>(node.rep_count) * body.size());
    for (int i = 0; i < node.rep_count; ++i)
      for (const Symbol& s : body) node.children.push_back(sample_symbol(s));
    return node;
  }

  TreeNode nonterminal(const Symbol& s) {
    const int id = s.ref;
    const auto& t_idx = g_.t_alt_indices[static_cast<size_t>(id)];
    const auto& nt_idx = g_.nt_alt_indices[static_cast<size_t>(id)];
    const int c = chain_[static_cast<size_t>(id)];

    bool leaf;
    if (nt_idx.empty()) {
      leaf = true;
    } else if (t_idx.empty()) {
      // No way to close this chain; the depth bound cannot be honored once
      // c reaches it.
      if (c >= b_.max_depth) throw SamplingStuckError(s.text, b_.max_depth);
      leaf = false;
    } else {
      // The coin is consumed whenever a real choice exists so the consumption
      // pattern is independent of the bounds; at c >= d the outcome is forced.
      bool drawn = src_.coin(leaf_probability(c, b_.max_depth));
      leaf = c >= b_.max_depth || drawn;
      out_.push_back({Choice::Tag::LeafCoin, leaf ? 1 : 0, "", false});
    }

    const auto& list = leaf ? t_idx : nt_idx;
    size_t pick = 0;
    if (list.size() > 1) {
      pick = src_.uniform(list.size());
      out_.push_back({Choice::Tag::AltChoice, static_cast<int64_t>(pick), s.text, leaf});
    }

    TreeNode node;
    node.kind = TreeNode::Kind::NonTerminal;
    node.name = s.text;
    node.alt_index = list[pick];
    node.leaf_alt = leaf;

    const Alternative& alt = g_.alternatives(id)[static_cast<size_t>(node.alt_index)];
    ++chain_[static_cast<size_t>(id)];
    node.children.reserve(alt.size());
    for (const Symbol& sym : alt) node.children.push_back(sample_symbol(sym));
    --chain_[static_cast<size_t>(id)];
    return node;
  }

  ChoiceSequence take_choices() { return std::move(out_); }

 private:
  const Grammar& g_;
  const SizeBounds& b_;
  ChoiceSource& src_;
  std::vector<int> chain_;
  ChoiceSequence out_;
};

}  // namespace

SampleResult bounded_sample(const Grammar& g, const Symbol& symbol, const SizeBounds& b,
                            ChoiceSource& src) {
  assert(g.finalized);
  Symbol resolved = symbol;
  resolve_against(resolved, g);
  Sampler sampler(g, b, src);
  SampleResult r;
  r.tree = sampler.sample_symbol(resolved);
  r.choices = sampler.take_choices();
  r.text = linearize(r.tree, g);
  return r;
}

SampleResult bounded_sample(const Grammar& g, const SizeBounds& b, ChoiceSource& src) {
  return bounded_sample(g, Symbol::nonterminal(g.start), b, src);
}

TreeNode concretize_terminal(const Grammar& g, const Symbol& terminal, const SizeBounds& b,
                             ChoiceSource& src, ChoiceSequence& out) {
  Symbol resolved = terminal;
  resolve_against(resolved, g);
  Sampler sampler(g, b, src);
  TreeNode node = sampler.concretize(resolved);
  ChoiceSequence cs = sampler.take_choices();
  out.insert(out.end(), cs.begin(), cs.end());
  return node;
}

TreeNode sample_repetition(const Grammar& g, const std::vector<Symbol>& body, const SizeBounds& b,
                           ChoiceSource& src, ChoiceSequence& out) {
  Symbol rep = Symbol::repetition(body);
  resolve_against(rep, g);
  Sampler sampler(g, b, src);
  TreeNode node = sampler.sample_symbol(rep);
  ChoiceSequence cs = sampler.take_choices();
  out.insert(out.end(), cs.begin(), cs.end());
  return node;
}

}  // namespace bonsai
