#!/usr/bin/env python3
"""
Run database inspection script to see stored sweeps and check results
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from sqlalchemy import Integer, func

from database.connection import get_db
from database.models import CheckRecord, SweepRecord


def inspect_database(output_dir: str | None = None) -> int:
    """Print every study and check suite held in the run database; returns the number of records"""
    db = next(get_db(output_dir))

    try:
        print("🔍 RUN DATABASE INSPECTION")
        print("=" * 50)

        studies = [row[0] for row in db.query(SweepRecord.study).distinct().order_by(SweepRecord.study)]
        print(f"\n📋 STUDIES ({len(studies)} total):")
        if not studies:
            print("  ❌ No sweep records found")
        for study in studies:
            records = (db.query(SweepRecord).filter(SweepRecord.study == study)
                       .order_by(SweepRecord.position).all())
            print(f"\n  📝 Study: {study}")
            for r in records:
                q = f"{r.q_linf:.3e}" if r.q_linf is not None else "-"
                print(f"     eps={r.epsilon:g} nu={r.nu:.3g} q_linf={q} {r.resolution} {r.regime} [{r.status}]")
                if r.error:
                    print(f"        ⚠️ {r.error}")

        suites = (db.query(CheckRecord.suite, func.count(CheckRecord.id),
                           func.sum(CheckRecord.passed.cast(Integer)))
                  .group_by(CheckRecord.suite).order_by(CheckRecord.suite).all())
        print(f"\n🧪 CHECK SUITES ({len(suites)} total):")
        for suite, total, passed in suites:
            marker = "✅" if passed == total else "❌"
            print(f"  {marker} {suite}: {passed}/{total} passed")

        total = db.query(SweepRecord).count() + db.query(CheckRecord).count()
        print(f"\n📊 DATABASE STATISTICS:")
        print(f"     Total Sweep Records: {db.query(SweepRecord).count()}")
        print(f"     Total Check Records: {db.query(CheckRecord).count()}")
        return total

    except Exception as e:
        print(f"❌ Error inspecting database: {e}")
        raise
    finally:
        db.close()


if __name__ == "__main__":
    inspect_database(sys.argv[1] if len(sys.argv) > 1 else None)
