#ifndef DEID_NER_HPP
#define DEID_NER_HPP

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "deid/corpus.hpp"
#include "deid/error.hpp"
#include "deid/lexicon.hpp"
#include "deid/spans.hpp"

// Statistical-NER seam. Two interchangeable taggers sit behind the
// TaggerConnection interface: a built-in gazetteer tagger (good enough for
// tests and for lexicon-only deployments) and an adapter that talks to an
// external tagger process over a line protocol. Backends answer in their
// own label vocabulary; map_labels translates to ours.

extern char** environ;

namespace deid {

// A tag as the backend produced it, label still in backend vocabulary.
struct RawTag {
  IOB2Tag::Kind kind = IOB2Tag::Kind::O;
  std::string label;  // empty for O

  bool operator==(const RawTag& other) const {
    if (kind != other.kind) return false;
    return kind == IOB2Tag::Kind::O || label == other.label;
  }
};

inline std::string to_string(const RawTag& tag) {
  switch (tag.kind) {
    case IOB2Tag::Kind::O: return "O";
    case IOB2Tag::Kind::B: return "B-" + tag.label;
    case IOB2Tag::Kind::I: return "I-" + tag.label;
  }
  return "O";
}

inline RawTag raw_tag_from_string(std::string_view text) {
  if (text == "O") return RawTag{};
  if (text.size() > 2 && (text[0] == 'B' || text[0] == 'I') && text[1] == '-')
    return RawTag{text[0] == 'B' ? IOB2Tag::Kind::B : IOB2Tag::Kind::I,
                  std::string(text.substr(2))};
  throw Error("malformed tag '" + std::string(text) + "' (expected O, B-<label> or I-<label>)");
}

// Backend label -> target Label, or nullopt to drop that class entirely.
using LabelMap = std::map<std::string, std::optional<Label>, std::less<>>;

inline LabelMap identity_label_map() {
  LabelMap map;
  for (Label label : all_labels) map.emplace(to_string(label), label);
  return map;
}

// TSV: backend_label <TAB> TARGET, where TARGET is a label name or DROP.
inline LabelMap read_label_map(std::istream& in, const std::string& file = "<label-map>") {
  LabelMap map;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError(file, line_no, "expected backend_label<TAB>target");
    std::string backend_label = line.substr(0, tab);
    std::string target = line.substr(tab + 1);
    if (backend_label.empty()) throw ParseError(file, line_no, "empty backend label");
    if (map.count(backend_label))
      throw ParseError(file, line_no, "duplicate backend label '" + backend_label + "'");
    std::string upper = target;
    for (char& c : upper) c = (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
    if (upper == "DROP") {
      map.emplace(std::move(backend_label), std::nullopt);
    } else {
      const auto label = label_from_string(upper);
      if (!label)
        throw ParseError(file, line_no, "unknown target label '" + target + "'");
      map.emplace(std::move(backend_label), *label);
    }
  }
  return map;
}

inline LabelMap load_label_map(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open label map file: " + path);
  return read_label_map(in, path);
}

enum class BackendKind { Builtin, External };

struct BackendConfig {
  BackendKind kind = BackendKind::Builtin;
  std::vector<std::string> command;           // External only
  LabelMap label_map = identity_label_map();  // backend vocabulary -> ours
  std::chrono::milliseconds timeout{60000};   // per-document deadline
  std::vector<Lexicon> gazetteers;            // Builtin only
};

inline void validate_backend_config(const BackendConfig& config) {
  if (config.kind == BackendKind::External && config.command.empty())
    throw ConfigError("external backend requires a non-empty command");
  if (config.timeout.count() <= 0) throw ConfigError("backend timeout must be positive");
}

// Translate backend tags to our label set. Drop-mapped tags become O; an
// I left without a head by that (or produced by a sloppy backend) is
// repaired to B so the output always satisfies the IOB2 invariant.
inline std::vector<IOB2Tag> map_labels(const std::vector<RawTag>& tags,
                                       const LabelMap& label_map) {
  std::vector<IOB2Tag> out;
  out.reserve(tags.size());
  for (const RawTag& tag : tags) {
    if (tag.kind == IOB2Tag::Kind::O) {
      out.push_back(IOB2Tag::o());
      continue;
    }
    const auto it = label_map.find(tag.label);
    if (it == label_map.end())
      throw BackendError("backend produced unknown label '" + tag.label +
                         "' (add it to the label map, or map it to DROP)");
    if (!it->second.has_value()) {
      out.push_back(IOB2Tag::o());
      continue;
    }
    out.push_back(tag.kind == IOB2Tag::Kind::B ? IOB2Tag::b(*it->second)
                                               : IOB2Tag::i(*it->second));
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].kind != IOB2Tag::Kind::I) continue;
    const bool headless = i == 0 || out[i - 1].kind == IOB2Tag::Kind::O ||
                          out[i - 1].label != out[i].label;
    if (headless) out[i].kind = IOB2Tag::Kind::B;
  }
  return out;
}

// One live tagging channel. Pipelines hold one connection per worker; a
// connection is not safe for concurrent use.
class TaggerConnection {
 public:
  virtual ~TaggerConnection() = default;
  virtual std::vector<RawTag> tag(const std::vector<Token>& tokens) = 0;
};

// Gazetteer tagger: all configured lexicons produce candidate spans, the
// standard merge resolves overlaps, and the surviving spans are written
// out as B/I runs over our own label names.
class BuiltinTagger : public TaggerConnection {
 public:
  explicit BuiltinTagger(std::vector<Lexicon> gazetteers)
      : gazetteers_(std::move(gazetteers)) {}

  std::vector<RawTag> tag(const std::vector<Token>& tokens) override {
    std::vector<CandidateSpan> candidates;
    for (const Lexicon& lexicon : gazetteers_) {
      std::vector<CandidateSpan> found =
          lexicon_match(tokens, lexicon, "lexicon-" + lower_name(lexicon.label()));
      candidates.insert(candidates.end(), found.begin(), found.end());
    }
    const std::vector<SelectedSpan> selected = merge_spans(std::move(candidates));

    std::vector<RawTag> tags(tokens.size());
    std::size_t span_index = 0;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      while (span_index < selected.size() && selected[span_index].end <= tokens[t].start)
        ++span_index;
      if (span_index == selected.size()) break;
      const SelectedSpan& span = selected[span_index];
      if (tokens[t].end <= span.start) continue;
      const bool is_head = tokens[t].start <= span.start;
      tags[t].kind = is_head ? IOB2Tag::Kind::B : IOB2Tag::Kind::I;
      tags[t].label = to_string(span.label);
    }
    return tags;
  }

 private:
  static std::string lower_name(Label label) {
    std::string name = to_string(label);
    for (char& c : name) c = (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
    return name;
  }

  std::vector<Lexicon> gazetteers_;
};

// Splits a command line into argv words; single and double quotes group
// words, backslash escapes the next character outside single quotes.
inline std::vector<std::string> split_command_line(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  bool in_word = false;
  char quote = '\0';
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quote == '\'') {
      if (c == '\'') quote = '\0';
      else current += c;
      continue;
    }
    if (c == '\\' && i + 1 < text.size() && quote != '\'') {
      current += text[++i];
      in_word = true;
      continue;
    }
    if (quote == '"') {
      if (c == '"') quote = '\0';
      else current += c;
      continue;
    }
    if (c == '\'' || c == '"') {
      quote = c;
      in_word = true;
      continue;
    }
    if (c == ' ' || c == '\t') {
      if (in_word) {
        words.push_back(std::move(current));
        current.clear();
        in_word = false;
      }
      continue;
    }
    current += c;
    in_word = true;
  }
  if (quote != '\0') throw ConfigError("unbalanced quote in command line: " + std::string(text));
  if (in_word) words.push_back(std::move(current));
  return words;
}

// Adapter for an external tagger process. The child is spawned once and
// kept alive across documents; each document is one request/response
// exchange on its standard streams. A missed deadline kills the child
// (the next call respawns it) and fails only the current document.
class ExternalTagger : public TaggerConnection {
 public:
  ExternalTagger(std::vector<std::string> command, std::chrono::milliseconds timeout)
      : command_(std::move(command)), timeout_(timeout) {
    if (command_.empty()) throw ConfigError("external backend requires a non-empty command");
    // A dying child must surface as EPIPE on write, not as a fatal signal.
    static std::once_flag ignore_sigpipe;
    std::call_once(ignore_sigpipe, [] { ::signal(SIGPIPE, SIG_IGN); });
  }

  ExternalTagger(const ExternalTagger&) = delete;
  ExternalTagger& operator=(const ExternalTagger&) = delete;

  ~ExternalTagger() override { shutdown(); }

  std::vector<RawTag> tag(const std::vector<Token>& tokens) override {
    ensure_running();

    std::string request;
    for (const Token& token : tokens) {
      request += token.surface;
      request += '\n';
    }
    request += '\n';

    std::string response;
    try {
      exchange(request, response, tokens.size());
    } catch (...) {
      shutdown();  // connection state is unknown; next call respawns
      throw;
    }
    return parse_response(response, tokens);
  }

 private:
  void ensure_running() {
    if (pid_ > 0) return;
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0) throw BackendError(errno_message("pipe"));
    if (::pipe(from_child) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw BackendError(errno_message("pipe"));
    }

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);
    for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]})
      posix_spawn_file_actions_addclose(&actions, fd);

    std::vector<char*> argv;
    argv.reserve(command_.size() + 1);
    for (const std::string& word : command_) argv.push_back(const_cast<char*>(word.c_str()));
    argv.push_back(nullptr);

    pid_t pid = -1;
    const int rc = ::posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(to_child[0]);
    ::close(from_child[1]);
    if (rc != 0) {
      ::close(to_child[1]);
      ::close(from_child[0]);
      throw BackendError("failed to start backend '" + command_[0] +
                         "': " + std::strerror(rc));
    }
    pid_ = pid;
    stdin_fd_ = to_child[1];
    stdout_fd_ = from_child[0];
    set_nonblocking(stdin_fd_);
    set_nonblocking(stdout_fd_);
  }

  // Pump the request out and the response in concurrently (a tagger may
  // start answering before the request is fully written) under one
  // deadline for the whole document.
  void exchange(const std::string& request, std::string& response, std::size_t token_count) {
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    std::size_t written = 0;
    char buffer[65536];

    while (!response_complete(response, token_count)) {
      const auto now = std::chrono::steady_clock::now();
      if (now >= deadline) throw timeout_error();
      const int wait_ms = static_cast<int>(
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count() + 1);

      pollfd fds[2];
      nfds_t nfds = 0;
      pollfd* write_slot = nullptr;
      if (written < request.size()) {
        fds[nfds] = {stdin_fd_, POLLOUT, 0};
        write_slot = &fds[nfds++];
      }
      fds[nfds] = {stdout_fd_, POLLIN, 0};
      pollfd* read_slot = &fds[nfds++];

      const int ready = ::poll(fds, nfds, wait_ms);
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw BackendError(errno_message("poll"));
      }
      if (ready == 0) throw timeout_error();

      if (write_slot && (write_slot->revents & (POLLOUT | POLLERR | POLLHUP))) {
        // stdin stays open after the request: the child lives across
        // documents and would take EOF as a shutdown signal.
        const ssize_t n =
            ::write(stdin_fd_, request.data() + written, request.size() - written);
        if (n >= 0) {
          written += static_cast<std::size_t>(n);
        } else if (errno == EPIPE) {
          throw child_died_error();
        } else if (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
          throw BackendError(errno_message("write to backend"));
        }
      }
      if (read_slot->revents & (POLLIN | POLLERR | POLLHUP)) {
        const ssize_t n = ::read(stdout_fd_, buffer, sizeof(buffer));
        if (n > 0) {
          response.append(buffer, static_cast<std::size_t>(n));
        } else if (n == 0) {
          if (!response_complete(response, token_count)) throw child_died_error();
        } else if (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
          throw BackendError(errno_message("read from backend"));
        }
      }
    }
  }

  // The response is complete once a blank line terminates it: either it
  // IS a lone blank line, or it contains "\n\n".
  static bool response_complete(const std::string& response, std::size_t /*token_count*/) {
    if (!response.empty() && response[0] == '\n') return true;
    return response.find("\n\n") != std::string::npos;
  }

  std::vector<RawTag> parse_response(const std::string& response,
                                     const std::vector<Token>& tokens) {
    std::vector<std::pair<std::string, std::string>> records;
    std::size_t pos = 0;
    while (pos < response.size()) {
      const std::size_t eol = response.find('\n', pos);
      if (eol == std::string::npos)
        throw BackendError("backend response not newline-terminated");
      std::string line = response.substr(pos, eol - pos);
      pos = eol + 1;
      if (line.empty()) break;  // terminator
      const std::size_t tab = line.find('\t');
      if (tab == std::string::npos)
        throw BackendError("backend protocol error: expected <surface><TAB><tag>, got '" +
                           line + "'");
      records.emplace_back(line.substr(0, tab), line.substr(tab + 1));
    }
    if (records.size() != tokens.size()) {
      std::ostringstream msg;
      msg << "backend protocol error: expected " << tokens.size() << " tags, got "
          << records.size();
      throw BackendError(msg.str());
    }
    std::vector<RawTag> tags;
    tags.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].first != tokens[i].surface)
        throw BackendError("backend protocol error: token " + std::to_string(i) +
                           " echoed as '" + records[i].first + "', expected '" +
                           tokens[i].surface + "'");
      try {
        tags.push_back(raw_tag_from_string(records[i].second));
      } catch (const Error& e) {
        throw BackendError(std::string("backend protocol error: ") + e.what());
      }
    }
    return tags;
  }

  BackendError timeout_error() const {
    std::ostringstream msg;
    msg << "backend '" << command_[0] << "' missed the "
        << std::chrono::duration_cast<std::chrono::seconds>(timeout_).count()
        << "s document deadline";
    return BackendError(msg.str());
  }

  BackendError child_died_error() {
    int status = 0;
    std::ostringstream msg;
    msg << "backend '" << command_[0] << "' exited before completing the response";
    if (pid_ > 0 && ::waitpid(pid_, &status, WNOHANG) == pid_) {
      if (WIFEXITED(status)) msg << " (exit status " << WEXITSTATUS(status) << ")";
      else if (WIFSIGNALED(status)) msg << " (killed by signal " << WTERMSIG(status) << ")";
      pid_ = -1;
    }
    return BackendError(msg.str());
  }

  static BackendError errno_message(const char* what) {
    return BackendError(std::string(what) + " failed: " + std::strerror(errno));
  }

  static void set_nonblocking(int fd) {
    const int flags = ::fcntl(fd, F_GETFL, 0);
    if (flags >= 0) ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
  }

  void shutdown() {
    if (stdin_fd_ >= 0) ::close(stdin_fd_);
    if (stdout_fd_ >= 0) ::close(stdout_fd_);
    stdin_fd_ = stdout_fd_ = -1;
    if (pid_ > 0) {
      ::kill(pid_, SIGTERM);
      for (int attempt = 0; attempt < 50; ++attempt) {
        if (::waitpid(pid_, nullptr, WNOHANG) == pid_) {
          pid_ = -1;
          return;
        }
        ::usleep(10000);
      }
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
      pid_ = -1;
    }
  }

  std::vector<std::string> command_;
  std::chrono::milliseconds timeout_;
  pid_t pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
};

inline std::unique_ptr<TaggerConnection> make_tagger(const BackendConfig& config) {
  validate_backend_config(config);
  if (config.kind == BackendKind::Builtin)
    return std::make_unique<BuiltinTagger>(config.gazetteers);
  return std::make_unique<ExternalTagger>(config.command, config.timeout);
}

// One-shot convenience: spawn (or build) a tagger, tag one token list.
inline std::vector<RawTag> tag_tokens(const std::vector<Token>& tokens,
                                      const BackendConfig& config) {
  return make_tagger(config)->tag(tokens);
}

}  // namespace deid

#endif  // DEID_NER_HPP
