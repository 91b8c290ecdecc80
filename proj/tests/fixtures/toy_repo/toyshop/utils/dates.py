import datetime


def is_weekend(day):
    return day.weekday() >= 5


def add_business_days(start, days):
    current = start
    added = 0
    while added < days:
        current += datetime.timedelta(days=1)
        if current.weekday() == 6:
            continue
        added += 1
    return current
