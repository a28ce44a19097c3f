import pytest
from hypothesis import given, strategies as st

from promptloop.core import EntityPair, EntityRecord
from promptloop.errors import TemplateError, ValidationError
from promptloop.prompting import (
    LABEL_WORDS,
    Demonstration,
    PromptSpec,
    load_default_template,
    parse_label,
    render_prompt,
)

from conftest import build_pair


def make_spec(demos=(), instruction='Answer "yes" or "no".'):
    return PromptSpec(
        task_description="Decide whether the records refer to the same entity.",
        demonstrations=tuple(demos),
        input_template="Record A:\n{left}\nRecord B:\n{right}",
        answer_instruction=instruction,
    )


def pair_with(pid, left_attrs, right_attrs):
    return EntityPair(pid, EntityRecord(left_attrs), EntityRecord(right_attrs))


class TestRenderPrompt:
    def test_zero_shot_contains_task_and_target_only(self):
        target = pair_with("t", {"title": "alpha"}, {"title": "beta"})
        text = render_prompt(make_spec(), target)
        assert text.startswith("Decide whether")
        assert "title: alpha" in text
        assert "title: beta" in text
        assert "Answer: " not in text  # no demonstration labels
        assert text.endswith('Answer "yes" or "no".')

    def test_demonstrations_render_in_iteration_then_id_order(self):
        d1 = Demonstration(build_pair("b", 3, 4), 1, annotated_at_iteration=1)
        d2 = Demonstration(build_pair("a", 1, 4), 0, annotated_at_iteration=2)
        target = build_pair("t", 2, 4)
        text = render_prompt(make_spec([d1, d2]), target)
        assert text.index("s0 s1 s2") < text.index("Answer: yes")
        assert text.index("Answer: yes") < text.index("Answer: no")

    def test_out_of_order_demonstrations_rejected(self):
        d1 = Demonstration(build_pair("b", 3, 4), 1, annotated_at_iteration=2)
        d2 = Demonstration(build_pair("a", 1, 4), 0, annotated_at_iteration=1)
        with pytest.raises(ValidationError, match="ordered"):
            make_spec([d1, d2])

    def test_explanation_sits_between_pair_and_label(self):
        demo = Demonstration(
            build_pair("a", 2, 4), 1, explanation="Shared venue and year.", annotated_at_iteration=1
        )
        text = render_prompt(make_spec([demo]), build_pair("t", 1, 4))
        block_start = text.index("Record A")
        explanation_at = text.index("Explanation: Shared venue and year.")
        label_at = text.index("Answer: yes")
        assert block_start < explanation_at < label_at

    def test_rendering_is_deterministic(self):
        demo = Demonstration(build_pair("a", 2, 4), 0, annotated_at_iteration=1)
        target = build_pair("t", 1, 4)
        spec = make_spec([demo])
        assert render_prompt(spec, target) == render_prompt(spec, target)

    def test_missing_placeholder_names_it(self):
        spec = PromptSpec(
            task_description="x",
            demonstrations=(),
            input_template="Record A:\n{left}",
            answer_instruction="y",
        )
        with pytest.raises(TemplateError, match=r"\{right\}"):
            render_prompt(spec, build_pair("t", 1, 2))

    def test_attribute_order_is_preserved(self):
        target = pair_with("t", {"year": "1999", "title": "alpha"}, {"title": "beta"})
        text = render_prompt(make_spec(), target)
        assert text.index("year: 1999") < text.index("title: alpha")

    def test_prefix_stability_and_monotone_growth(self):
        target = build_pair("t", 1, 4)
        demos = [
            Demonstration(build_pair(f"d{i}", i, 4), i % 2, annotated_at_iteration=i + 1)
            for i in range(4)
        ]
        previous_render = render_prompt(make_spec(demos[:1]), target)
        for count in range(2, 5):
            text = render_prompt(make_spec(demos[:count]), target)
            assert len(text) > len(previous_render)
            prefix = previous_render.rsplit("Record A", 1)[0]
            assert text.startswith(prefix)
            previous_render = text


class TestParseLabel:
    def test_leading_affirmative(self):
        assert parse_label("Yes, they refer to the same paper.") == 1

    def test_negative_phrase_precedence(self):
        assert parse_label("These are not a match.") == 0
        assert parse_label("This is a non-match.") == 0

    def test_no_decision_token(self):
        assert parse_label("I cannot determine this.") is None

    def test_match_token(self):
        assert parse_label("They match on all fields.") == 1

    def test_bare_no(self):
        assert parse_label("No. Different venues.") == 0

    def test_embedded_tokens_do_not_count(self):
        assert parse_label("mismatch rhinoceros") is None
        assert parse_label("nothing matches here") is None

    def test_first_token_wins(self):
        assert parse_label("no, wait, yes") == 0
        assert parse_label("yes... actually not a match") == 1

    def test_case_insensitive(self):
        assert parse_label("YES") == 1
        assert parse_label("Non-Match") == 0

    @given(st.sampled_from([0, 1]))
    def test_label_word_round_trip(self, label):
        assert parse_label(LABEL_WORDS[label]) == label

    def test_rendered_demonstration_round_trips(self):
        # neutral attribute values so the only decision token is the label word
        demo = Demonstration(
            pair_with("a", {"title": "alpha beta"}, {"title": "gamma"}),
            0,
            annotated_at_iteration=1,
        )
        text = render_prompt(make_spec([demo]), pair_with("t", {"title": "x"}, {"title": "y"}))
        demo_block = text.split("\n\n")[1]
        assert parse_label(demo_block) == 0


class TestDefaultTemplates:
    def test_assets_load(self):
        for name in (
            "task_description",
            "input_template",
            "answer_instruction",
            "answer_instruction_reasoned",
        ):
            assert load_default_template(name).strip()

    def test_default_input_template_has_both_placeholders(self):
        template = load_default_template("input_template")
        assert "{left}" in template and "{right}" in template


class TestDemonstration:
    def test_blank_explanation_rejected(self):
        with pytest.raises(ValidationError, match="empty"):
            Demonstration(build_pair("a", 1, 2), 1, explanation="   ")

    def test_iteration_must_be_positive(self):
        with pytest.raises(ValidationError):
            Demonstration(build_pair("a", 1, 2), 1, annotated_at_iteration=0)
