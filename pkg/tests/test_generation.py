import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from clintriage.config import builtin_data_path
from clintriage.domain import DiseaseLabel, Vitals
from clintriage.errors import GenerationUnavailableError, ValidationError
from clintriage.generation import (DrugLexicon, GenerationParams,
                                   PromptContext, TreatmentPlan,
                                   assemble_prompt, extract_drug_mentions,
                                   generate_builtin, generate_external,
                                   load_drug_lexicon, load_fallback_table)
from clintriage.retrieval import DialogueEntry


@pytest.fixture(scope="module")
def lexicon():
    return load_drug_lexicon(builtin_data_path("drug_lexicon.json"))


@pytest.fixture(scope="module")
def fallbacks():
    return load_fallback_table(builtin_data_path("fallback_treatments.json"))


def entry(i, doctor, patient="patient text"):
    return DialogueEntry(id=f"e{i}", patient_utterance=patient,
                         doctor_response=doctor)


def ctx_with(evidence, disease="Dengue", symptoms="joint pain and rash",
             vitals=None):
    return PromptContext(symptoms=symptoms, vitals=vitals or Vitals(),
                         evidence=tuple(evidence),
                         diagnosis=DiseaseLabel(index=0, name=disease))


class TestAssemblePrompt:
    def test_sections_in_order(self):
        prompt = assemble_prompt(ctx_with(
            [(entry(1, "rest and fluids"), 0.9)],
            vitals=Vitals(temperature=101.5, age=25, sex="male")))
        lines = prompt.splitlines()
        assert lines[0] == "DIAGNOSIS: Dengue"
        assert lines[1] == "SYMPTOMS: joint pain and rash"
        assert lines[2].startswith("VITALS: temperature=101.5")
        assert "age=25" in lines[2] and "sex=male" in lines[2]
        assert lines[3] == "EVIDENCE:"
        assert lines[4].startswith("[1] (score=0.9000) rest and fluids")

    def test_empty_evidence(self):
        prompt = assemble_prompt(ctx_with([]))
        assert prompt.splitlines()[-2:] == ["EVIDENCE:", "(none)"]
        assert "VITALS: (none)" in prompt

    def test_deterministic(self):
        ctx = ctx_with([(entry(1, "rest"), 0.8), (entry(2, "fluids"), 0.5)])
        assert assemble_prompt(ctx) == assemble_prompt(ctx)

    def test_budget_drops_lowest_scored_first(self):
        # blocks are "[i] (score=0.x000) <40 chars>": each 58 chars; budget
        # of 120 admits exactly the two highest-scored blocks
        docs = [(entry(i, "d" * 40), round(0.9 - 0.1 * i, 4)) for i in range(3)]
        block_len = len(f"[1] (score=0.9000) {'d' * 40}")
        prompt = assemble_prompt(ctx_with(docs), evidence_budget=2 * block_len)
        lines = prompt.splitlines()
        evidence_lines = lines[lines.index("EVIDENCE:") + 1:]
        assert len(evidence_lines) == 2
        assert evidence_lines[0].startswith("[1] (score=0.9000)")
        assert evidence_lines[1].startswith("[2] (score=0.8000)")

    def test_scores_must_be_non_increasing(self):
        with pytest.raises(ValidationError):
            ctx_with([(entry(1, "a"), 0.2), (entry(2, "b"), 0.9)])


class TestExtractDrugMentions:
    def test_omeprazole_and_class_marker(self, lexicon):
        mentions = extract_drug_mentions("Start omeprazole, avoid NSAIDs", lexicon)
        assert [m.canonical for m in mentions] == ["omeprazole", "nsaid-class"]

    def test_spans_index_into_text(self, lexicon):
        text = "Start omeprazole, avoid NSAIDs"
        for mention in extract_drug_mentions(text, lexicon):
            surface = text[mention.span[0]:mention.span[1]]
            assert lexicon.canonical(surface) == mention.canonical

    def test_no_hits(self, lexicon):
        assert extract_drug_mentions("rest and sleep well", lexicon) == []

    def test_dedup_keeps_first_span(self, lexicon):
        text = "azithromycin now, then azithromycin again"
        mentions = extract_drug_mentions(text, lexicon)
        assert len(mentions) == 1
        assert mentions[0].span == (0, len("azithromycin"))

    def test_longest_match_wins(self):
        lex = DrugLexicon(
            entries={"warfarin": "warfarin", "warfarin sodium": "warfarin-sodium"},
            class_tags={})
        mentions = extract_drug_mentions("take warfarin sodium daily", lex)
        assert [m.canonical for m in mentions] == ["warfarin-sodium"]

    def test_word_boundaries(self, lexicon):
        assert extract_drug_mentions("naproxenol is not naproxen!", lexicon) == [
            extract_drug_mentions("naproxen", lexicon)[0].__class__(
                canonical="naproxen", span=(18, 26))]

    def test_case_insensitive(self, lexicon):
        mentions = extract_drug_mentions("IBUPROFEN and Paracetamol", lexicon)
        assert [m.canonical for m in mentions] == ["ibuprofen", "paracetamol"]

    def test_multiword_surface(self, lexicon):
        mentions = extract_drug_mentions("apply benzoyl peroxide gel", lexicon)
        assert mentions[0].canonical == "benzoyl-peroxide"


class TestGenerateBuiltin:
    def test_embeds_top_response_and_extracts_drugs(self, lexicon, fallbacks):
        evidence = [(entry(1, "Start omeprazole, avoid NSAIDs"), 0.91),
                    (entry(2, "rest only"), 0.4)]
        plan = generate_builtin(ctx_with(evidence, disease="peptic ulcer disease"),
                                lexicon, fallbacks)
        assert "Start omeprazole, avoid NSAIDs" in plan.text
        assert plan.text.startswith("For peptic ulcer disease:")
        assert plan.text.endswith("Follow up with a clinician.")
        assert "omeprazole" in plan.drug_ids()
        assert plan.source == "builtin-template"

    def test_empty_evidence_uses_fallback_line(self, lexicon, fallbacks):
        plan = generate_builtin(ctx_with([], disease="Dengue"), lexicon, fallbacks)
        assert plan.text == fallbacks["Dengue"]

    def test_unknown_disease_generic_fallback(self, lexicon, fallbacks):
        plan = generate_builtin(ctx_with([], disease="mystery pox"), lexicon,
                                fallbacks)
        assert plan.text == fallbacks["__default__"]

    def test_deterministic(self, lexicon, fallbacks):
        ctx = ctx_with([(entry(1, "fluids and cetirizine"), 0.7)])
        a = generate_builtin(ctx, lexicon, fallbacks)
        b = generate_builtin(ctx, lexicon, fallbacks)
        assert a == b

    def test_never_empty_for_valid_diagnosis(self, lexicon, fallbacks):
        for disease in ("Dengue", "Pneumonia", "never-seen-disease"):
            plan = generate_builtin(ctx_with([], disease=disease), lexicon,
                                    fallbacks)
            assert plan.text.strip()


class _StubHandler(BaseHTTPRequestHandler):
    mode = "echo"
    recorded: list = []

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        type(self).recorded.append(body)
        if type(self).mode == "echo":
            payload = json.dumps({"text": body["prompt"]}).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.end_headers()
            self.wfile.write(payload)
        elif type(self).mode == "missing-text":
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.end_headers()
            self.wfile.write(b'{"speech": "hello"}')
        else:
            self.send_response(500)
            self.end_headers()

    def log_message(self, *args):
        pass


@pytest.fixture()
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _StubHandler.recorded = []
    _StubHandler.mode = "echo"
    yield f"http://127.0.0.1:{server.server_port}/generate"
    server.shutdown()


class TestGenerateExternal:
    def test_echo_round_trip(self, stub_server, lexicon):
        ctx = ctx_with([(entry(1, "take cetirizine"), 0.8)])
        plan = generate_external(ctx, stub_server, GenerationParams(), lexicon)
        assert plan.text == assemble_prompt(ctx)
        assert plan.source == "external"
        assert "cetirizine" in plan.drug_ids()

    def test_params_forwarded_verbatim(self, stub_server, lexicon):
        ctx = ctx_with([])
        generate_external(ctx, stub_server,
                          GenerationParams(beam_size=3, temperature=0.7,
                                           max_tokens=128), lexicon)
        body = _StubHandler.recorded[-1]
        assert body["beam_size"] == 3
        assert body["temperature"] == 0.7
        assert body["max_tokens"] == 128
        assert body["prompt"] == assemble_prompt(ctx)

    def test_unreachable_endpoint(self, lexicon):
        with pytest.raises(GenerationUnavailableError, match="unreachable"):
            generate_external(ctx_with([]), "http://127.0.0.1:1/generate",
                              GenerationParams(), lexicon, timeout_s=0.5)

    def test_non_200(self, stub_server, lexicon):
        _StubHandler.mode = "boom"
        with pytest.raises(GenerationUnavailableError, match="HTTP 500"):
            generate_external(ctx_with([]), stub_server, GenerationParams(),
                              lexicon)

    def test_missing_text_field(self, stub_server, lexicon):
        _StubHandler.mode = "missing-text"
        with pytest.raises(GenerationUnavailableError, match="missing 'text'"):
            generate_external(ctx_with([]), stub_server, GenerationParams(),
                              lexicon)


class TestPlanInvariants:
    def test_duplicate_canonicals_rejected(self):
        from clintriage.generation import DrugMention

        with pytest.raises(ValidationError):
            TreatmentPlan(text="aaaa bbbb", source="builtin-template",
                          generation_params=GenerationParams(),
                          drugs=(DrugMention("x", (0, 4)),
                                 DrugMention("x", (5, 9))))

    def test_span_out_of_bounds_rejected(self):
        from clintriage.generation import DrugMention

        with pytest.raises(ValidationError):
            TreatmentPlan(text="abc", source="builtin-template",
                          generation_params=GenerationParams(),
                          drugs=(DrugMention("x", (0, 10)),))
