import pytest

from lawluo.backends import MockBackend
from lawluo.core import (
    AblationConfig,
    DomainLabel,
    LawyerTurnAdded,
    UserTurnAdded,
    apply_event,
    load_domains,
    new_session,
    others_domain,
)
from lawluo.errors import BackendUnavailable, UsageError
from lawluo.lawyer import generic_persona, respond, role_enhance
from lawluo.tolc import VerifiedSet


class TestRoleEnhance:
    def test_domain_name_appears_exactly_once(self):
        for domain in load_domains()[:15]:
            persona = role_enhance(domain)
            assert persona.system_prompt.count(domain.name) == 1

    def test_others_gets_generalist_persona(self):
        persona = role_enhance(others_domain())
        assert "Others" not in persona.system_prompt
        assert "general practice" in persona.system_prompt

    def test_pure_function(self):
        d = DomainLabel(4, "Contract Dispute")
        assert role_enhance(d) == role_enhance(d)

    def test_sixteen_distinct_personas(self):
        prompts = {role_enhance(d).system_prompt for d in load_domains()}
        assert len(prompts) == 16

    def test_adjacent_domains_differ_only_in_domain_substring(self):
        d1, d2 = load_domains()[:2]
        p1, p2 = role_enhance(d1).system_prompt, role_enhance(d2).system_prompt
        assert p1 != p2
        assert p1.replace(d1.name, "X") == p2.replace(d2.name, "X")


class RecordingBackend(MockBackend):
    def __init__(self):
        self.requests = []

    def chat(self, request):
        self.requests.append(request)
        return super().chat(request)


def _consultation_session():
    s = new_session(AblationConfig(receptionist_enabled=False), seed=3)
    s = apply_event(s, UserTurnAdded("what about my lease?"))
    s = apply_event(s, LawyerTurnAdded("please describe the lease term"))
    return s


class TestRespond:
    def test_single_candidate_single_call(self):
        backend = RecordingBackend()
        session = _consultation_session()
        out = respond(generic_persona(), session, "it runs two years", None, backend, n_candidates=1)
        assert len(out) == 1
        assert len(backend.requests) == 1

    def test_verified_fact_sent_verbatim(self):
        backend = RecordingBackend()
        session = _consultation_session()
        verified = VerifiedSet("it runs two years", affirmed=("the deposit was two months of rent",))
        respond(generic_persona(), session, "it runs two years", verified, backend)
        final = backend.requests[0].messages[-1]["content"]
        assert "the deposit was two months of rent" in final

    def test_three_candidates_pairwise_distinct(self):
        backend = MockBackend()
        session = _consultation_session()
        out = respond(generic_persona(), session, "it runs two years", None, backend, n_candidates=3)
        assert len(set(out)) == 3

    def test_history_reproduced_in_order(self):
        backend = RecordingBackend()
        session = _consultation_session()
        respond(generic_persona(), session, "next question", None, backend)
        messages = backend.requests[0].messages
        assert messages[0]["role"] == "system"
        assert [m["content"] for m in messages[1:3]] == [
            "what about my lease?",
            "please describe the lease term",
        ]
        assert [m["role"] for m in messages[1:3]] == ["user", "assistant"]

    def test_latest_user_turn_not_duplicated(self):
        backend = RecordingBackend()
        session = apply_event(_consultation_session(), UserTurnAdded("new question"))
        respond(generic_persona(), session, "new question", None, backend)
        contents = [m["content"] for m in backend.requests[0].messages]
        assert contents.count("new question") == 1

    def test_partial_failures_tolerated(self):
        class FlakyBackend(MockBackend):
            def __init__(self):
                self.calls = 0

            def chat(self, request):
                self.calls += 1
                if self.calls == 2:
                    raise BackendUnavailable("blip")
                return super().chat(request)

        session = _consultation_session()
        with pytest.warns(UserWarning):
            out = respond(generic_persona(), session, "q", None, FlakyBackend(), n_candidates=3)
        assert len(out) == 2

    def test_total_failure_raises(self):
        class DeadBackend:
            def chat(self, request):
                raise BackendUnavailable("down")

        session = _consultation_session()
        with pytest.raises(BackendUnavailable):
            respond(generic_persona(), session, "q", None, DeadBackend(), n_candidates=2)

    def test_zero_candidates_rejected(self, mock_backend):
        with pytest.raises(UsageError):
            respond(generic_persona(), _consultation_session(), "q", None, mock_backend, n_candidates=0)
