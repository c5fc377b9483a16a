"""Thin file-backed store for bookings and reviews."""


def connect(path):
    return {"path": path, "tables": {}}


def save_record(db, table, record):
    db["tables"].setdefault(table, []).append(record)


def fetch_records(db, table):
    return list(db["tables"].get(table, []))
