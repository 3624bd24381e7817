#include "tspbmc/library.hpp"

#include <fstream>

#include "tspbmc/error.hpp"

namespace tspbmc {

namespace {

constexpr const char* kFair = R"({"name": "fair", "overrides": []})";

std::vector<LibraryEntry> make_library() {
  std::vector<LibraryEntry> lib;

  lib.push_back({"nspkt",
                 R"(# Needham-Schroeder public key protocol with timed nonces.
name: NSPK_T
roles: A B
fresh: Ta by A class nonce lifetime 10
fresh: Tb by B class nonce lifetime 10
goal: secrecy Tb sid any
complete: 1
step 1: A -> B : <KB, Ta | A> delay 1
step 2: B -> A : <KA, Ta | Tb> delay 1
step 3: A -> B : <KB, Tb> delay 1
)",
                 {{"fair", kFair},
                  {"mitm1_lowe", R"({
  "name": "mitm1_lowe",
  "sessions": 2,
  "overrides": [
    {"sid": 1, "step": 1, "kind": "replace", "edge": "A->I", "L": "<KB,Ta#1|A>"},
    {"sid": 1, "step": 2, "kind": "intruder", "edge": "I->A", "L": "<KA,Ta#1|Tb#1>"},
    {"sid": 1, "step": 3, "kind": "replace", "edge": "A->I", "L": "<KI,Tb#1>"},
    {"sid": 2, "step": 1, "kind": "intruder", "edge": "I->B", "L": "<KB,Ta#1|A>"},
    {"sid": 2, "step": 2, "kind": "replace", "edge": "B->I", "L": "<KA,Ta#1|Tb#1>"},
    {"sid": 2, "step": 3, "kind": "intruder", "edge": "I->B", "L": "<KB,Tb#1>"}
  ]
})"}},
                 {"mitm1_lowe"},
                 "Lowe's man-in-the-middle attack. A starts a session with the intruder; the intruder "
                 "re-encrypts A's nonce for B and forwards B's reply to A, who decrypts it and hands B's "
                 "nonce to the intruder. Delays and lifetimes are illustrative values."});

  lib.push_back({"nspkt_lowe_fixed",
                 R"(# Lowe's fix: the responder names itself inside message 2.
name: NSPK_T_LOWE
roles: A B
fresh: Ta by A class nonce lifetime 10
fresh: Tb by B class nonce lifetime 10
goal: secrecy Tb sid any
complete: 1
step 1: A -> B : <KB, Ta | A> delay 1
step 2: B -> A : <KA, Ta | Tb | B> delay 1
step 3: A -> B : <KB, Tb> delay 1
)",
                 {{"fair", kFair},
                  {"mitm1_lowe_adapted", R"({
  "name": "mitm1_lowe_adapted",
  "sessions": 2,
  "overrides": [
    {"sid": 1, "step": 1, "kind": "replace", "edge": "A->I", "L": "<KB,Ta#1|A>"},
    {"sid": 1, "step": 2, "kind": "intruder", "edge": "I->A", "L": "<KA,Ta#1|Tb#1|I>"},
    {"sid": 1, "step": 3, "kind": "replace", "edge": "A->I", "L": "<KI,Tb#1>"},
    {"sid": 2, "step": 1, "kind": "intruder", "edge": "I->B", "L": "<KB,Ta#1|A>"},
    {"sid": 2, "step": 2, "kind": "replace", "edge": "B->I", "L": "<KA,Ta#1|Tb#1|B>"},
    {"sid": 2, "step": 3, "kind": "intruder", "edge": "I->B", "L": "<KB,Tb#1>"}
  ]
})"}},
                 {},
                 "The man-in-the-middle scenario replayed against the fixed protocol. B's reply now "
                 "carries B's name, so A would need <KA,Ta#1|Tb#1|I>, which the intruder cannot build."});

  lib.push_back({"wmf",
                 R"(# Wide Mouthed Frog with timestamps and a session-key lifetime.
name: WMF
roles: A B S
fresh: Ta by A class timestamp lifetime 4
fresh: Kab by A class sesskey lifetime 4
fresh: Ts by S class timestamp lifetime 4
fresh: Nb by B class nonce
goal: secrecy Nb sid 2
step 1: A -> S : A | <KAS, Ta | B | Kab> delay 1
step 2: S -> B : <KBS, Ts | A | Kab> delay 1
step 3: B -> A : <Kab, Nb> delay 1
)",
                 {{"fair", R"({"name": "fair", "sessions": 2, "overrides": []})"},
                  {"replay", R"({
  "name": "replay",
  "sessions": 2,
  "compromised": ["Kab#1"],
  "overrides": [
    {"sid": 1, "step": 1, "kind": "retime", "lifetime": {"Kab": 20}},
    {"sid": 2, "step": 1, "kind": "intruder", "edge": "I->S", "L": "A|<KAS,Ta#1|B|Kab#1>"},
    {"sid": 2, "step": 2, "kind": "intruder", "edge": "I->B", "L": "<KBS,Ts#1|A|Kab#1>", "delay": 5},
    {"sid": 2, "step": 3, "kind": "replace", "edge": "B->A", "L": "<Kab#1,Nb#2>"}
  ]
})"},
                  {"replay_tight", R"({
  "name": "replay_tight",
  "sessions": 2,
  "compromised": ["Kab#1"],
  "overrides": [
    {"sid": 1, "step": 1, "kind": "retime", "lifetime": {"Kab": 4}},
    {"sid": 2, "step": 1, "kind": "intruder", "edge": "I->S", "L": "A|<KAS,Ta#1|B|Kab#1>"},
    {"sid": 2, "step": 2, "kind": "intruder", "edge": "I->B", "L": "<KBS,Ts#1|A|Kab#1>", "delay": 5},
    {"sid": 2, "step": 3, "kind": "replace", "edge": "B->A", "L": "<Kab#1,Nb#2>"}
  ]
})"}},
                 {"replay"},
                 "Replay of session 1's messages into session 2 after the old key Kab#1 leaked. B accepts "
                 "the stale key only while its lifetime covers the slow replay: a lifetime of 20 lets the "
                 "attack through, a lifetime of 4 stops it. The goal protects session 2's nonce."});

  lib.push_back({"dsp",
                 R"(# Denning-Sacco shared-key protocol with a server timestamp.
name: DSP
roles: A B S
fresh: Kab by S class sesskey
fresh: Ts by S class timestamp lifetime 10
fresh: Nb by B class nonce
goal: secrecy Nb sid any
step 1: A -> S : A | B delay 1
step 2: S -> A : <KAS, B | Kab | Ts | <KBS, Kab | A | Ts>> delay 1
step 3: A -> B : <KBS, Kab | A | Ts> delay 1
step 4: B -> A : <Kab, Nb> delay 1
)",
                 {{"fair", kFair},
                  {"compromise", R"({
  "name": "compromise",
  "sessions": 1,
  "compromised": ["KAS"],
  "overrides": []
})"}},
                 {"compromise"},
                 "Long-term key compromise: with KAS known, the intruder opens the server's reply, learns "
                 "the session key and reads B's nonce."});
  return lib;
}

}  // namespace

const std::vector<LibraryEntry>& library() {
  static const std::vector<LibraryEntry> lib = make_library();
  return lib;
}

const LibraryEntry* find_library_entry(const std::string& name) {
  for (const LibraryEntry& e : library())
    if (e.name == name) return &e;
  return nullptr;
}

std::vector<std::filesystem::path> export_library(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> written;
  auto put = [&](const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw Error("cannot write " + path.string());
    written.push_back(path);
  };
  for (const LibraryEntry& e : library()) {
    put(dir / (e.name + ".ab"), e.protocol_text);
    for (const auto& [name, text] : e.scenarios) put(dir / e.name / (name + ".json"), text + "\n");
  }
  return written;
}

}  // namespace tspbmc
