#include "patternmine/pattern_dsl.hpp"

#include <boost/regex.hpp>

#include "patternmine/error.hpp"
#include "patternmine/text_util.hpp"

namespace patternmine {

namespace detail {
struct RegexProgram {
  boost::regex re;
  int verbalizer_group = 0;
  int input_group = 0;
  int hyp_group = 0;
  int prem_group = 0;
};
}  // namespace detail

namespace {

constexpr std::string_view kStarRegex = "[^.!?]*?";
constexpr std::string_view kSentenceBody = "[^.!?]+[.!?]+";
constexpr std::string_view kTerminatorRun = "[.!?]+";
constexpr std::string_view kWhitespaceRun = "\\s+";

bool is_regex_meta(char c) {
  switch (c) {
    case '\\': case '^': case '$': case '.': case '|': case '?': case '*':
    case '+': case '(': case ')': case '[': case ']': case '{': case '}':
      return true;
    default:
      return false;
  }
}

bool is_template_special(char c) { return c == '\\' || c == '*' || c == '{' || c == '}'; }

bool is_plain_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '\'' || c == '-';
}

// Length of a "(word|word|...)" group at the start of `s`, or 0. At least two
// alternatives are required; "(word)" is treated as literal parentheses.
std::size_t plain_alternation_length(std::string_view s) {
  if (s.empty() || s.front() != '(') return 0;
  std::size_t i = 1;
  int alternatives = 0;
  for (;;) {
    const std::size_t start = i;
    while (i < s.size() && is_plain_word_char(s[i])) ++i;
    if (i == start) return 0;
    ++alternatives;
    if (i >= s.size()) return 0;
    if (s[i] == ')') return alternatives >= 2 ? i + 1 : 0;
    if (s[i] != '|') return 0;
    ++i;
  }
}

[[noreturn]] void malformed(std::string_view raw, const std::string& why) {
  throw Error(ErrorCode::MalformedTemplate,
              "template \"" + std::string(raw) + "\": " + why);
}

TemplateToken keyword_token(std::string_view raw, std::string_view keyword) {
  if (keyword == "VERBALIZER") return VerbalizerSlot{};
  if (keyword == "INPUT") return InputSlot{InputRole::single};
  if (keyword == "INPUT:HYP") return InputSlot{InputRole::hyp};
  if (keyword == "INPUT:PREM") return InputSlot{InputRole::prem};
  malformed(raw, "unknown keyword {" + std::string(keyword) + "}");
}

void check_slots(std::string_view raw, const std::vector<TemplateToken>& tokens, Arity arity) {
  int verbalizer = 0, single = 0, hyp = 0, prem = 0;
  for (const auto& t : tokens) {
    if (std::holds_alternative<VerbalizerSlot>(t)) ++verbalizer;
    if (const auto* in = std::get_if<InputSlot>(&t)) {
      switch (in->role) {
        case InputRole::single: ++single; break;
        case InputRole::hyp: ++hyp; break;
        case InputRole::prem: ++prem; break;
      }
    }
  }
  if (verbalizer != 1) malformed(raw, "expected exactly one {VERBALIZER}");
  if (arity == Arity::single_input && !(single == 1 && hyp == 0 && prem == 0)) {
    malformed(raw, "a single-input template needs exactly one {INPUT} and no HYP/PREM slots");
  }
  if (arity == Arity::pair_input && !(single == 0 && hyp == 1 && prem == 1)) {
    malformed(raw, "a pair template needs exactly one {INPUT:HYP} and one {INPUT:PREM}");
  }
}

}  // namespace

PatternTemplate parse_template(std::string_view raw, Arity arity) {
  if (raw.empty()) malformed(raw, "empty template");
  PatternTemplate out;
  out.raw = std::string(raw);
  out.arity = arity;
  std::string literal;
  auto flush = [&] {
    if (!literal.empty()) out.tokens.emplace_back(LiteralToken{std::move(literal)});
    literal.clear();
  };
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const char c = raw[i];
    if (c == '\\') {
      if (i + 1 >= raw.size() || !is_template_special(raw[i + 1])) {
        malformed(raw, "backslash must escape one of \\ * { }");
      }
      literal.push_back(raw[++i]);
    } else if (c == '{') {
      const std::size_t close = raw.find_first_of("{}", i + 1);
      if (close == std::string_view::npos || raw[close] != '}') malformed(raw, "unbalanced '{'");
      flush();
      out.tokens.push_back(keyword_token(raw, raw.substr(i + 1, close - i - 1)));
      i = close;
    } else if (c == '}') {
      malformed(raw, "unbalanced '}'");
    } else if (c == '*') {
      flush();
      out.tokens.emplace_back(StarToken{});
    } else {
      literal.push_back(c);
    }
  }
  flush();
  check_slots(raw, out.tokens, arity);
  return out;
}

std::string serialize(std::span<const TemplateToken> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (const auto* lit = std::get_if<LiteralToken>(&t)) {
      for (char c : lit->text) {
        if (is_template_special(c)) out.push_back('\\');
        out.push_back(c);
      }
    } else if (std::holds_alternative<VerbalizerSlot>(t)) {
      out += "{VERBALIZER}";
    } else if (std::holds_alternative<StarToken>(t)) {
      out += "*";
    } else {
      switch (std::get<InputSlot>(t).role) {
        case InputRole::single: out += "{INPUT}"; break;
        case InputRole::hyp: out += "{INPUT:HYP}"; break;
        case InputRole::prem: out += "{INPUT:PREM}"; break;
      }
    }
  }
  return out;
}

std::string escape_regex(std::string_view text) {
  std::string out;
  out.reserve(text.size() * 2);
  for (char c : text) {
    if (is_regex_meta(c)) out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string expand_verbalizer_group(const VerbalizerSet& vs) {
  std::string out = "(";
  for (std::size_t i = 0; i < vs.verbalizers.size(); ++i) {
    if (i) out.push_back('|');
    out += escape_regex(vs.verbalizers[i]);
  }
  out.push_back(')');
  return out;
}

std::string_view to_string(CaptureRole role) {
  switch (role) {
    case CaptureRole::input: return "INPUT";
    case CaptureRole::hyp: return "HYP";
    case CaptureRole::prem: return "PREM";
    case CaptureRole::verbalizer: return "VERBALIZER";
  }
  return "?";
}

CompiledMatcher compile(const PatternTemplate& tmpl, const VerbalizerSet& vs, bool swap_roles) {
  CompiledMatcher m;
  m.label = vs.label;
  m.arity = tmpl.arity;
  m.verbalizers = vs.verbalizers;

  std::string& rx = m.regex_source;
  int group = 0;
  bool after_star = false;
  for (const auto& token : tmpl.tokens) {
    if (const auto* lit = std::get_if<LiteralToken>(&token)) {
      std::string_view text = lit->text;
      if (after_star && !text.empty() && text.front() == '.') {
        rx += kTerminatorRun;
        text.remove_prefix(1);
      }
      while (!text.empty()) {
        if (is_space(text.front())) {
          while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
          rx += kWhitespaceRun;
        } else if (const std::size_t n = plain_alternation_length(text); n > 0) {
          rx += text.substr(0, n);
          ++group;
          text.remove_prefix(n);
        } else {
          if (is_regex_meta(text.front())) rx.push_back('\\');
          rx.push_back(text.front());
          text.remove_prefix(1);
        }
      }
      after_star = false;
      continue;
    }
    after_star = std::holds_alternative<StarToken>(token);
    if (after_star) {
      rx += kStarRegex;
    } else if (std::holds_alternative<VerbalizerSlot>(token)) {
      rx += expand_verbalizer_group(vs);
      m.capture_map.push_back({++group, CaptureRole::verbalizer});
    } else {
      InputRole role = std::get<InputSlot>(token).role;
      if (swap_roles && role != InputRole::single) {
        role = role == InputRole::hyp ? InputRole::prem : InputRole::hyp;
      }
      static constexpr std::string_view kNames[] = {"input", "hyp", "prem"};
      static constexpr CaptureRole kRoles[] = {CaptureRole::input, CaptureRole::hyp,
                                               CaptureRole::prem};
      const auto r = static_cast<std::size_t>(role);
      rx += "(?<";
      rx += kNames[r];
      rx += ">";
      rx += kSentenceBody;
      rx += ")";
      m.capture_map.push_back({++group, kRoles[r]});
    }
  }

  auto program = std::make_shared<detail::RegexProgram>();
  try {
    program->re.assign(rx, boost::regex::perl | boost::regex::icase | boost::regex::optimize);
  } catch (const boost::regex_error& e) {
    throw Error(ErrorCode::CompileError, "regex \"" + rx + "\" rejected: " + e.what());
  }
  if (program->re.mark_count() != static_cast<std::size_t>(group)) {
    throw Error(ErrorCode::CompileError, "regex \"" + rx + "\" has an unexpected group count");
  }
  for (const auto& cg : m.capture_map) {
    switch (cg.role) {
      case CaptureRole::verbalizer: program->verbalizer_group = cg.index; break;
      case CaptureRole::input: program->input_group = cg.index; break;
      case CaptureRole::hyp: program->hyp_group = cg.index; break;
      case CaptureRole::prem: program->prem_group = cg.index; break;
    }
  }
  m.program_ = std::move(program);
  return m;
}

std::vector<CompiledMatcher> compile_task(const TaskSpec& task) {
  std::vector<CompiledMatcher> out;
  out.reserve(task.patterns.size() * task.classes.size());
  for (std::size_t p = 0; p < task.patterns.size(); ++p) {
    const PatternTemplate tmpl = parse_template(task.patterns[p], task.arity);
    for (std::size_t c = 0; c < task.classes.size(); ++c) {
      CompiledMatcher m = compile(tmpl, task.classes[c], task.swap_roles);
      m.pattern_index = p;
      m.class_index = c;
      out.push_back(std::move(m));
    }
  }
  return out;
}

std::optional<MatchSpans> CompiledMatcher::search(std::string_view text, std::size_t from) const {
  if (!program_ || from > text.size()) return std::nullopt;
  const char* base = text.data();
  boost::match_flag_type flags = boost::match_default;
  if (from > 0) flags |= boost::match_prev_avail;
  boost::cmatch m;
  if (!boost::regex_search(base + from, base + text.size(), m, program_->re, flags)) {
    return std::nullopt;
  }
  // Role groups are numbered from 1; 0 marks a role the template lacks.
  auto span_of = [&](int group) {
    if (group < 0 || !m[group].matched) return Span{};
    return Span{static_cast<std::size_t>(m[group].first - base),
                static_cast<std::size_t>(m[group].second - base)};
  };
  MatchSpans out;
  auto role_span = [&](int group) { return group > 0 ? span_of(group) : Span{}; };
  out.whole = span_of(0);
  out.verbalizer = role_span(program_->verbalizer_group);
  out.input = role_span(program_->input_group);
  out.hyp = role_span(program_->hyp_group);
  out.prem = role_span(program_->prem_group);
  return out;
}

const std::string* CompiledMatcher::canonical_verbalizer(std::string_view matched) const {
  for (const auto& v : verbalizers) {
    if (iequals_ascii(v, matched)) return &v;
  }
  return nullptr;
}

}  // namespace patternmine
