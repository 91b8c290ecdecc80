from toyshop.utils.dates import add_business_days

RATES = {"standard": (4.99, 5), "express": (14.99, 2)}


def shipping_quote(method, weight_kg):
    base, _ = RATES[method]
    return base + max(0.0, weight_kg - 1.0) * 1.5


def estimate_delivery(order_date, method):
    _, days = RATES[method]
    return add_business_days(order_date, days)
