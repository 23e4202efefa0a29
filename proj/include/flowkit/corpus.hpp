#pragma once

// Built-in example models and scenarios.  Generated by
// tools/embed_corpus.py from the files under corpus/; the embedded
// text is byte-identical to those files.  Do not edit by hand.

#include <optional>
#include <string_view>
#include <vector>

namespace flowkit {

struct CorpusModel {
  std::string_view name;  // stable entry name
  std::string_view file;  // file name under corpus/
  std::string_view text;
};

struct CorpusScenario {
  std::string_view name;   // file stem
  std::string_view file;   // file name under corpus/scenarios/
  std::string_view model;  // entry name of the model it drives
  std::string_view text;
};

namespace corpus_text {

inline constexpr std::string_view book_flow =
    R"fmsrc(# A borrowed book.  Stock waits on the shelf until released, passes through
# the librarian's hands, and ends up with the borrower.

thing book

sphere Shelf {
  machine Book of book { stages { Release Transfer Storage } }
}
sphere Librarian {
  machine Book of book { stages { Receive Release Transfer } }
}
sphere Borrower {
  machine Book of book { stages { Transfer } }
}

flow Shelf.Book.Storage -> Shelf.Book.Release
flow Shelf.Book.Release -> Shelf.Book.Transfer
flow Shelf.Book.Transfer -> Librarian.Book.Transfer
flow Librarian.Book.Transfer -> Librarian.Book.Receive
flow Librarian.Book.Receive -> Librarian.Book.Release
flow Librarian.Book.Release -> Librarian.Book.Transfer
flow Librarian.Book.Transfer -> Borrower.Book.Transfer
)fmsrc";

inline constexpr std::string_view speaker_listener =
    R"fmsrc(# Speech between two minds.  A concept forming in the speaker triggers the
# creation of words; the words flow to the listener, and their receipt
# triggers an understanding.

thing concept
thing word
thing understanding

sphere Speaker {
  machine Concepts of concept { stages { Create } }
  machine Words of word { stages { Create Release Transfer } }
}
sphere Listener {
  machine Words of word { stages { Receive Transfer } }
  machine Understanding of understanding { stages { Create } }
}

flow Speaker.Words.Create -> Speaker.Words.Release
flow Speaker.Words.Release -> Speaker.Words.Transfer
flow Speaker.Words.Transfer -> Listener.Words.Transfer
flow Listener.Words.Transfer -> Listener.Words.Receive

trigger Speaker.Concepts.Create => Speaker.Words.Create
trigger Listener.Words.Receive => Listener.Understanding.Create
)fmsrc";

inline constexpr std::string_view job_offer_events =
    R"fmsrc(# A job offer with a deadline.  Selecting a candidate triggers an offer,
# which is parked in storage; creating the offer starts a deadline clock,
# and when the deadline is processed the offer is released and sent out.

thing candidate
thing offer
thing deadline

sphere Recruitment {
  machine Selection of candidate { stages { Create Process } }
  machine Offers of offer { stages { Create Release Transfer Storage } }
  machine Deadlines of deadline { stages { Create Process } }
}

flow Recruitment.Selection.Create -> Recruitment.Selection.Process
flow Recruitment.Offers.Create -> Recruitment.Offers.Storage
flow Recruitment.Offers.Release -> Recruitment.Offers.Transfer
flow Recruitment.Deadlines.Create -> Recruitment.Deadlines.Process

trigger Recruitment.Selection.Process => Recruitment.Offers.Create
trigger Recruitment.Offers.Create => Recruitment.Deadlines.Create
trigger Recruitment.Deadlines.Process => Recruitment.Offers.Release
)fmsrc";

inline constexpr std::string_view phosphorus_cycle =
    R"fmsrc(# The phosphorus cycle.  Weathering releases phosphorus from rock into
# water, rivers carry it to the ocean, it settles into sediment, and
# uplift folds the sea floor back into rock.  The loop never ends, so
# simulations of this model run until their tick budget truncates them.

thing phosphorus

sphere Rocks {
  machine Phosphorus of phosphorus { stages { Receive Release Transfer Storage } }
}
sphere Water {
  machine Phosphorus of phosphorus { stages { Receive Release Transfer } }
}
sphere Ocean {
  machine Phosphorus of phosphorus { stages { Receive Release Transfer } }
}
sphere Sediments {
  machine Phosphorus of phosphorus { stages { Receive Release Transfer Storage } }
}

flow Rocks.Phosphorus.Storage -> Rocks.Phosphorus.Release
flow Rocks.Phosphorus.Release -> Rocks.Phosphorus.Transfer
flow Rocks.Phosphorus.Transfer -> Water.Phosphorus.Transfer
flow Water.Phosphorus.Transfer -> Water.Phosphorus.Receive
flow Water.Phosphorus.Receive -> Water.Phosphorus.Release
flow Water.Phosphorus.Release -> Water.Phosphorus.Transfer
flow Water.Phosphorus.Transfer -> Ocean.Phosphorus.Transfer
flow Ocean.Phosphorus.Transfer -> Ocean.Phosphorus.Receive
flow Ocean.Phosphorus.Receive -> Ocean.Phosphorus.Release
flow Ocean.Phosphorus.Release -> Ocean.Phosphorus.Transfer
flow Ocean.Phosphorus.Transfer -> Sediments.Phosphorus.Transfer
flow Sediments.Phosphorus.Transfer -> Sediments.Phosphorus.Receive
flow Sediments.Phosphorus.Receive -> Sediments.Phosphorus.Storage
flow Sediments.Phosphorus.Storage -> Sediments.Phosphorus.Release
flow Sediments.Phosphorus.Release -> Sediments.Phosphorus.Transfer
flow Sediments.Phosphorus.Transfer -> Rocks.Phosphorus.Transfer
flow Rocks.Phosphorus.Transfer -> Rocks.Phosphorus.Receive
flow Rocks.Phosphorus.Receive -> Rocks.Phosphorus.Storage
)fmsrc";

inline constexpr std::string_view call_center =
    R"fmsrc(# Hiring a call-center agent, end to end.  A recruiter offers the job; the
# candidate answers; an accepted answer inside the deadline opens a hiring
# decision; background checks inform a verdict; a hired candidate is
# registered, invited, and shows up in person for orientation, equipment
# issue, and training.  A rejected verdict flows a cancellation back to
# the recruiter instead.

thing candidate
thing offer
thing response { answer: {accept, decline} }
thing decision
thing background-check
thing check
thing hiring-decision { verdict: {hire, reject} }
thing cancellation
thing registration
thing invitation
thing person
thing badge
thing account
thing equipment
thing schedule
thing profile
thing interview

sphere Recruiter {
  machine Selection of candidate { stages { Create Process } }
  machine Offer of offer { stages { Create Release Transfer } }
  machine Response of response { stages { Receive Process Transfer } }
  machine Cancellation of cancellation { stages { Receive Transfer } }
}
sphere Candidate {
  machine Offer of offer { stages { Receive Process Transfer } }
  machine Response of response { stages { Create Release Transfer } }
  machine Invitation of invitation { stages { Receive Process Transfer } }
  machine Person of person { stages { Release Transfer Storage } }
}
sphere System {
  machine Decision of decision { stages { Create Release Transfer } }
}
sphere HR-Admin {
  machine Decision of decision { stages { Receive Process Transfer } }
  machine Background-Check of background-check { stages { Create Release Transfer } }
  machine Social-Media-Check of check { stages { Create Process } }
  machine Credit-Check of check { stages { Create Process } }
  machine Criminal-Check of check { stages { Create Process } }
}
sphere HR-Manager {
  machine Background-Check of background-check { stages { Receive Process Transfer } }
  machine Hiring-Decision of hiring-decision { stages { Create Process Release Transfer } }
  machine Cancellation of cancellation { stages { Create Release Transfer } }
}
sphere Hiring-Manager {
  machine Hiring-Decision of hiring-decision { stages { Receive Process Transfer } }
  machine Registration of registration { stages { Create Process } }
  machine Invitation of invitation { stages { Create Release Transfer } }
}
sphere Call-Center-Manager {
  machine Orientation of person { stages { Receive Process Release Transfer } }
  machine Badge of badge { stages { Create } }
  machine Account of account { stages { Create } }
  machine Equipment of equipment { stages { Create } }
  machine Training of person { stages { Receive Process Transfer } }
  machine Schedule of schedule { stages { Create } }
  machine Profile of profile { stages { Create } }
  machine Interview of interview { stages { Create } }
}

# Both go-conditions must hold before the hiring decision process starts:
# the candidate accepted, and the answer landed inside the deadline.
junction Hiring-Go => System.Decision.Create

# Offer preparation and delivery.
flow Recruiter.Selection.Create -> Recruiter.Selection.Process
flow Recruiter.Offer.Create -> Recruiter.Offer.Release
flow Recruiter.Offer.Release -> Recruiter.Offer.Transfer
flow Recruiter.Offer.Transfer -> Candidate.Offer.Transfer
flow Candidate.Offer.Transfer -> Candidate.Offer.Receive
flow Candidate.Offer.Receive -> Candidate.Offer.Process

# The candidate's answer travels back.
flow Candidate.Response.Create -> Candidate.Response.Release
flow Candidate.Response.Release -> Candidate.Response.Transfer
flow Candidate.Response.Transfer -> Recruiter.Response.Transfer
flow Recruiter.Response.Transfer -> Recruiter.Response.Receive
flow Recruiter.Response.Receive -> Recruiter.Response.Process

# The go-decision reaches HR administration.
flow System.Decision.Create -> System.Decision.Release
flow System.Decision.Release -> System.Decision.Transfer
flow System.Decision.Transfer -> HR-Admin.Decision.Transfer
flow HR-Admin.Decision.Transfer -> HR-Admin.Decision.Receive
flow HR-Admin.Decision.Receive -> HR-Admin.Decision.Process

# Background checking.
flow HR-Admin.Background-Check.Create -> HR-Admin.Background-Check.Release
flow HR-Admin.Background-Check.Release -> HR-Admin.Background-Check.Transfer
flow HR-Admin.Background-Check.Transfer -> HR-Manager.Background-Check.Transfer
flow HR-Manager.Background-Check.Transfer -> HR-Manager.Background-Check.Receive
flow HR-Manager.Background-Check.Receive -> HR-Manager.Background-Check.Process
flow HR-Admin.Social-Media-Check.Create -> HR-Admin.Social-Media-Check.Process
flow HR-Admin.Credit-Check.Create -> HR-Admin.Credit-Check.Process
flow HR-Admin.Criminal-Check.Create -> HR-Admin.Criminal-Check.Process

# The verdict; release is gated on a hire verdict.
flow HR-Manager.Hiring-Decision.Create -> HR-Manager.Hiring-Decision.Process
flow HR-Manager.Hiring-Decision.Release -> HR-Manager.Hiring-Decision.Transfer
flow HR-Manager.Hiring-Decision.Transfer -> Hiring-Manager.Hiring-Decision.Transfer
flow Hiring-Manager.Hiring-Decision.Transfer -> Hiring-Manager.Hiring-Decision.Receive
flow Hiring-Manager.Hiring-Decision.Receive -> Hiring-Manager.Hiring-Decision.Process

# A rejection is cancelled back to the recruiter.
flow HR-Manager.Cancellation.Create -> HR-Manager.Cancellation.Release
flow HR-Manager.Cancellation.Release -> HR-Manager.Cancellation.Transfer
flow HR-Manager.Cancellation.Transfer -> Recruiter.Cancellation.Transfer
flow Recruiter.Cancellation.Transfer -> Recruiter.Cancellation.Receive

# Registration, then an invitation to show up.
flow Hiring-Manager.Registration.Create -> Hiring-Manager.Registration.Process
flow Hiring-Manager.Invitation.Create -> Hiring-Manager.Invitation.Release
flow Hiring-Manager.Invitation.Release -> Hiring-Manager.Invitation.Transfer
flow Hiring-Manager.Invitation.Transfer -> Candidate.Invitation.Transfer
flow Candidate.Invitation.Transfer -> Candidate.Invitation.Receive
flow Candidate.Invitation.Receive -> Candidate.Invitation.Process

# The new hire reports in person: orientation, then training.
flow Candidate.Person.Release -> Candidate.Person.Transfer
flow Candidate.Person.Transfer -> Call-Center-Manager.Orientation.Transfer
flow Call-Center-Manager.Orientation.Transfer -> Call-Center-Manager.Orientation.Receive
flow Call-Center-Manager.Orientation.Receive -> Call-Center-Manager.Orientation.Process
flow Call-Center-Manager.Orientation.Release -> Call-Center-Manager.Orientation.Transfer
flow Call-Center-Manager.Orientation.Transfer -> Call-Center-Manager.Training.Transfer
flow Call-Center-Manager.Training.Transfer -> Call-Center-Manager.Training.Receive
flow Call-Center-Manager.Training.Receive -> Call-Center-Manager.Training.Process

trigger Recruiter.Selection.Process => Recruiter.Offer.Create
trigger Candidate.Offer.Process => Candidate.Response.Create
trigger Recruiter.Response.Process => junction Hiring-Go when answer = accept
trigger Recruiter.Response.Process => junction Hiring-Go when tick <= offer-deadline
trigger HR-Admin.Decision.Process => HR-Admin.Background-Check.Create
trigger HR-Admin.Background-Check.Create => HR-Admin.Social-Media-Check.Create
trigger HR-Admin.Background-Check.Create => HR-Admin.Credit-Check.Create
trigger HR-Admin.Background-Check.Create => HR-Admin.Criminal-Check.Create
trigger HR-Manager.Background-Check.Process => HR-Manager.Hiring-Decision.Create
trigger HR-Manager.Hiring-Decision.Process => HR-Manager.Hiring-Decision.Release when verdict = hire
trigger HR-Manager.Hiring-Decision.Process => HR-Manager.Cancellation.Create when verdict = reject
trigger Hiring-Manager.Hiring-Decision.Process => Hiring-Manager.Registration.Create
trigger Hiring-Manager.Registration.Process => Hiring-Manager.Invitation.Create
trigger Candidate.Invitation.Process => Candidate.Person.Release
trigger Call-Center-Manager.Orientation.Process => Call-Center-Manager.Badge.Create
trigger Call-Center-Manager.Badge.Create => Call-Center-Manager.Account.Create
trigger Call-Center-Manager.Account.Create => Call-Center-Manager.Equipment.Create
trigger Call-Center-Manager.Equipment.Create => Call-Center-Manager.Orientation.Release
trigger Call-Center-Manager.Training.Process => Call-Center-Manager.Schedule.Create
trigger Call-Center-Manager.Schedule.Create => Call-Center-Manager.Profile.Create
trigger Call-Center-Manager.Profile.Create => Call-Center-Manager.Interview.Create
)fmsrc";

inline constexpr std::string_view scenario_book =
    R"fmsrc({
  "initial_tokens": [
    {"machine": "Shelf.Book", "stage": "Storage", "kind": "book"}
  ],
  "max_ticks": 20
}
)fmsrc";

inline constexpr std::string_view scenario_speaker =
    R"fmsrc({
  "initial_tokens": [
    {"machine": "Speaker.Concepts", "stage": "Create", "kind": "concept"}
  ],
  "max_ticks": 20
}
)fmsrc";

inline constexpr std::string_view scenario_joboffer =
    R"fmsrc({
  "initial_tokens": [
    {"machine": "Recruitment.Selection", "stage": "Create", "kind": "candidate"}
  ],
  "max_ticks": 20
}
)fmsrc";

inline constexpr std::string_view scenario_phosphorus =
    R"fmsrc({
  "initial_tokens": [
    {"machine": "Rocks.Phosphorus", "stage": "Storage", "kind": "phosphorus"}
  ],
  "max_ticks": 40
}
)fmsrc";

inline constexpr std::string_view scenario_callcenter_accept =
    R"fmsrc({
  "initial_tokens": [
    {"machine": "Recruiter.Selection", "stage": "Create", "kind": "candidate"},
    {"machine": "Candidate.Person", "stage": "Storage", "kind": "person"}
  ],
  "bindings": {"answer": "accept", "verdict": "hire"},
  "deadlines": {"offer-deadline": 20},
  "max_ticks": 100
}
)fmsrc";

inline constexpr std::string_view scenario_callcenter_decline =
    R"fmsrc({
  "initial_tokens": [
    {"machine": "Recruiter.Selection", "stage": "Create", "kind": "candidate"},
    {"machine": "Candidate.Person", "stage": "Storage", "kind": "person"}
  ],
  "bindings": {"answer": "decline", "verdict": "hire"},
  "deadlines": {"offer-deadline": 20},
  "max_ticks": 100
}
)fmsrc";

inline constexpr std::string_view scenario_callcenter_expired =
    R"fmsrc({
  "initial_tokens": [
    {"machine": "Recruiter.Selection", "stage": "Create", "kind": "candidate"},
    {"machine": "Candidate.Person", "stage": "Storage", "kind": "person"}
  ],
  "bindings": {"answer": "accept", "verdict": "hire"},
  "deadlines": {"offer-deadline": 5},
  "max_ticks": 100
}
)fmsrc";

inline constexpr std::string_view scenario_callcenter_negative =
    R"fmsrc({
  "initial_tokens": [
    {"machine": "Recruiter.Selection", "stage": "Create", "kind": "candidate"},
    {"machine": "Candidate.Person", "stage": "Storage", "kind": "person"}
  ],
  "bindings": {"answer": "accept", "verdict": "reject"},
  "deadlines": {"offer-deadline": 20},
  "max_ticks": 100
}
)fmsrc";

}  // namespace corpus_text

inline const std::vector<CorpusModel>& corpus_models() {
  static const std::vector<CorpusModel> models = {
      {"book-flow", "book.fm", corpus_text::book_flow},
      {"speaker-listener", "speaker.fm", corpus_text::speaker_listener},
      {"job-offer-events", "joboffer.fm", corpus_text::job_offer_events},
      {"phosphorus-cycle", "phosphorus.fm", corpus_text::phosphorus_cycle},
      {"call-center", "callcenter.fm", corpus_text::call_center},
  };
  return models;
}

inline const std::vector<CorpusScenario>& corpus_scenarios() {
  static const std::vector<CorpusScenario> scenarios = {
      {"book", "book.json", "book-flow", corpus_text::scenario_book},
      {"speaker", "speaker.json", "speaker-listener", corpus_text::scenario_speaker},
      {"joboffer", "joboffer.json", "job-offer-events", corpus_text::scenario_joboffer},
      {"phosphorus", "phosphorus.json", "phosphorus-cycle", corpus_text::scenario_phosphorus},
      {"callcenter-accept", "callcenter-accept.json", "call-center", corpus_text::scenario_callcenter_accept},
      {"callcenter-decline", "callcenter-decline.json", "call-center", corpus_text::scenario_callcenter_decline},
      {"callcenter-expired", "callcenter-expired.json", "call-center", corpus_text::scenario_callcenter_expired},
      {"callcenter-negative", "callcenter-negative.json", "call-center", corpus_text::scenario_callcenter_negative},
  };
  return scenarios;
}

// Looks a model up by entry name or file stem ("book-flow" or "book").
inline const CorpusModel* corpus_find(std::string_view key) {
  for (const CorpusModel& m : corpus_models()) {
    std::string_view stem = m.file.substr(0, m.file.rfind('.'));
    if (m.name == key || stem == key) return &m;
  }
  return nullptr;
}

}  // namespace flowkit
