#include "hornpoc/codegen.hpp"

#include <cctype>

#ifndef HORNPOC_VERSION
#define HORNPOC_VERSION "0.0.0"
#endif

namespace hornpoc {

const char* version() { return HORNPOC_VERSION; }

const std::string& LiteralAllocator::literal(const Term& closed) {
  auto it = memo_.find(closed);
  if (it != memo_.end()) return it->second;
  return memo_.emplace(closed, "x" + std::to_string(++counter_)).first->second;
}

namespace {

const FunctionSymbolAnnotation* symbol_annotation(const Model& m, const Term& t) {
  if (!t.is_function()) return nullptr;
  const FunctionSymbol* f = m.find_function(t.id(), t.arity());
  return f && f->annotation ? &*f->annotation : nullptr;
}

// Post-order: literals for unannotated subterms first.
void allocate_inner(const Model& m, LiteralAllocator& alloc, const Term& t) {
  for (const Term& a : t.args()) {
    allocate_inner(m, alloc, a);
    if (!symbol_annotation(m, a)) alloc.literal(a);
  }
}

}  // namespace

std::string translate_term(const Model& m, LiteralAllocator& alloc, const Term& t) {
  if (!t.is_closed()) throw CodegenError("cannot translate open term " + to_string(t));
  const FunctionSymbolAnnotation* a = symbol_annotation(m, t);
  if (!a) {
    allocate_inner(m, alloc, t);
    return alloc.literal(t);
  }
  std::string out;
  for (const SymbolSegment& seg : a->segments) {
    if (const auto* lit = std::get_if<std::string>(&seg)) {
      out += *lit;
    } else {
      out += translate_term(m, alloc, t.args()[static_cast<std::size_t>(std::get<IndexHole>(seg).index - 1)]);
    }
  }
  return out;
}

std::optional<std::string> translate_node(const Clause& c, const Substitution& sub, const Model& m,
                                          LiteralAllocator& alloc) {
  if (!c.annotation) return std::nullopt;
  std::string out;
  for (const ClauseSegment& seg : c.annotation->segments) {
    if (const auto* lit = std::get_if<std::string>(&seg)) {
      out += *lit;
      continue;
    }
    Term t = apply(sub, std::get<TermHole>(seg).term);
    if (!t.is_closed()) {
      throw CodegenError("clause \"" + c.label + "\": hole " + to_string(std::get<TermHole>(seg).term) +
                         " instantiates to open term " + to_string(t));
    }
    out += translate_term(m, alloc, t);
  }
  return out;
}

PocProgram translate_tree(const Model& m, const DerivationTree& t) {
  PocProgram p;
  p.model_name = m.name;
  p.query = to_string(t.root_fact);
  p.header = m.header.value_or("");
  p.footer = m.footer.value_or("");
  LiteralAllocator alloc;
  for (const DerivationNode* n : post_order(t)) {
    auto line = translate_node(n->clause, n->sub, m, alloc);
    if (line && !line->empty()) p.body.push_back({std::move(*line), n->id});
  }
  return p;
}

std::string render(const PocProgram& p) {
  std::string out = std::string("# generated-by: hornpoc ") + version() + " model=" + p.model_name +
                    " query=" + p.query + "\n";
  std::vector<std::string> blocks;
  if (!p.header.empty()) blocks.push_back(p.header);
  if (!p.body.empty()) {
    std::string body;
    for (std::size_t i = 0; i < p.body.size(); ++i) {
      if (i) body += "\n";
      body += p.body[i].text;
    }
    blocks.push_back(std::move(body));
  }
  if (!p.footer.empty()) blocks.push_back(p.footer);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (i) out += "\n\n";
    out += blocks[i];
  }
  if (!blocks.empty()) out += "\n";
  return out;
}

std::string poc_file_name(std::size_t index, const Fact& query, std::string_view ext) {
  std::string s;
  bool pending = false;
  for (char c : to_string(query)) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      if (pending && !s.empty()) s += '_';
      pending = false;
      s += c;
    } else {
      pending = true;
    }
  }
  return std::to_string(index) + "_" + s + std::string(ext);
}

}  // namespace hornpoc
