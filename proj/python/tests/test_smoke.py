import insight


def test_cohort_and_dsl():
    users = insight.generate_cohort(n_users=3, seed=4)
    assert [u.user_id for u in users] == ["user_0001", "user_0002", "user_0003"]
    u = users[0]
    assert u.days == 31
    assert u.violations() == []
    rows = u.daily_rows()
    assert len(rows) == 31 and rows[-1]["datetime"] == u.today
    steps = [r["steps"] for r in rows if r["steps"] is not None]
    got = insight.evaluate('daily["steps"].mean()', u)
    assert abs(got - sum(steps) / len(steps)) < 1e-9
    assert insight.evaluate('daily["steps"].during("2000-01-01").mean()', u) is None
    assert insight.analyze('daily["breathing_rate"].mean()', u).startswith("#ERROR#: UnknownColumn")
    assert "| datetime |" in u.markdown(3)


def test_cohort_round_trip(tmp_path):
    users = insight.generate_cohort(n_users=2, seed=1)
    manifest = insight.save_cohort(users, tmp_path)
    assert "user_0002" in manifest
    back = insight.load_cohort(tmp_path)
    assert [b.daily_rows() for b in back] == [u.daily_rows() for u in users]


def test_benchmark_with_oracle_backend():
    users = insight.generate_cohort(n_users=2, seed=2)
    qs = insight.generate_benchmark(users, 30, seed=3)
    assert len(qs) == 30
    for method in ("agent", "codegen"):
        rep = insight.run_benchmark(method, qs, users, backend="oracle")
        assert rep["n"] == 30
        assert rep["accuracy"] == 1.0


def test_exact_match_and_search():
    assert insight.exact_match("2.541", 2.54)
    assert not insight.exact_match("2.53", 2.54)
    assert insight.exact_match("NO_DATA", None)
    hits = insight.search("deep sleep adults", 3)
    assert 1 <= len(hits) <= 3
    assert all(len(h["snippet"]) <= 500 for h in hits)


def test_ask_demo():
    u = insight.generate_cohort(n_users=1)[0]
    out = insight.ask(u, "What is my BMI?")
    assert out["answer"] is not None
    assert out["trace"][-1]["kind"] == "finish"
    assert [s["seq"] for s in out["trace"]] == list(range(len(out["trace"])))
