import pytest

from sourcerank.model import (
    MISSING,
    Analyst,
    Criterion,
    CriterionBallot,
    CriterionScoreSheet,
    DataSource,
    MethodConfig,
    ProblemStatement,
    Round,
    Session,
    SourceScoreMatrix,
    legal_transition,
    session_from_dict,
    session_to_dict,
    validate_session,
)

from conftest import a2_matrices, a2_sheets


def build_session(problem, config=None) -> Session:
    session = Session(
        id="s1",
        problem=problem,
        analysts=[Analyst("A1", "Chief of operations"), Analyst("A2", "Head of sales")],
        criteria=[Criterion("c1", "Trust"), Criterion("c2", "Knowledge of the product")],
        sources=[
            DataSource("d1", "Key customers", "external-stakeholder"),
            DataSource("d2", "Internal engineers", "internal-stakeholder"),
        ],
        config=config or MethodConfig(),
        state="computed",
    )
    session.rounds.append(
        Round(
            index=0,
            shortlist=["c1", "c2"],
            ballots=[
                CriterionBallot("A1", {"c1": 1, "c2": 1}),
                CriterionBallot("A2", {"c1": 1, "c2": 1}),
            ],
            sheets=a2_sheets(),
            matrices=a2_matrices(),
        )
    )
    return session


class TestValidation:
    def test_valid_session_has_no_violations(self, problem):
        assert validate_session(build_session(problem)) == []

    def test_duplicate_criterion_id(self, problem):
        session = build_session(problem)
        session.criteria.append(Criterion("c1", "Duplicate"))
        kinds = {v.kind for v in validate_session(session)}
        assert "DuplicateId" in kinds

    def test_zero_sheet_flagged(self, problem):
        session = build_session(problem)
        session.rounds[0].sheets[0] = CriterionScoreSheet("A1", {"c1": 0, "c2": 0})
        kinds = {v.kind for v in validate_session(session)}
        assert "ZeroSheet" in kinds

    def test_missing_problem_field(self):
        problem = ProblemStatement("", "better", "by 10%", ("do it",))
        assert any(v.kind == "EmptyField" for v in problem.violations())

    def test_out_of_scale_matrix_cell(self, problem):
        session = build_session(problem)
        cells = dict(session.rounds[0].matrices[0].cells)
        cells[("d1", "c1")] = 7
        session.rounds[0].matrices[0] = SourceScoreMatrix("A1", cells)
        assert any(v.kind == "OutOfScale" for v in validate_session(session))

    def test_missing_cells_are_explicit(self, problem):
        session = build_session(problem)
        cells = dict(session.rounds[0].matrices[0].cells)
        del cells[("d1", "c1")]
        session.rounds[0].matrices[0] = SourceScoreMatrix("A1", cells)
        assert any(v.kind == "CellSetMismatch" for v in validate_session(session))

    def test_panel_wide_zero_column(self, problem):
        session = build_session(problem)
        for i, m in enumerate(session.rounds[0].matrices):
            cells = {k: (0 if k[1] == "c1" else v) for k, v in m.cells.items()}
            session.rounds[0].matrices[i] = SourceScoreMatrix(m.analyst_id, cells)
        assert any(v.kind == "ZeroColumn" for v in validate_session(session))

    def test_ballot_must_cover_criteria(self, problem):
        session = build_session(problem)
        session.rounds[0].ballots[0] = CriterionBallot("A1", {"c1": 1})
        assert any(v.kind == "CriterionSetMismatch" for v in validate_session(session))

    def test_bad_config(self, problem):
        config = MethodConfig(vote_threshold_policy="at-least", at_least_t=0)
        assert any(v.kind == "BadConfig" for v in config.violations(2))


class TestStateMachine:
    def test_forward_chain(self):
        assert legal_transition("drafting", "voting")
        assert legal_transition("voting", "weighting")
        assert legal_transition("weighting", "scoring")
        assert legal_transition("scoring", "computed")

    def test_consensus_round_reopens_scoring(self):
        assert legal_transition("computed", "scoring")

    def test_no_backwards_or_skips(self):
        assert not legal_transition("voting", "drafting")
        assert not legal_transition("drafting", "scoring")
        assert not legal_transition("closed", "voting")

    def test_any_state_can_close(self):
        for state in ("drafting", "voting", "weighting", "scoring", "computed"):
            assert legal_transition(state, "closed")


class TestSerialization:
    def test_round_trip_identity(self, problem):
        session = build_session(problem)
        cells = dict(session.rounds[0].matrices[0].cells)
        cells[("d1", "c1")] = MISSING
        session.rounds[0].matrices[0] = SourceScoreMatrix("A1", cells)
        decoded = session_from_dict(session_to_dict(session))
        assert decoded == session

    def test_missing_survives_round_trip(self, problem):
        session = build_session(problem)
        cells = dict(session.rounds[0].matrices[0].cells)
        cells[("d2", "c2")] = MISSING
        session.rounds[0].matrices[0] = SourceScoreMatrix("A1", cells)
        decoded = session_from_dict(session_to_dict(session))
        assert decoded.rounds[0].matrices[0].cells[("d2", "c2")] is MISSING

    def test_unknown_schema_rejected(self, problem):
        data = session_to_dict(build_session(problem))
        data["schema"] = 99
        with pytest.raises(Exception):
            session_from_dict(data)
