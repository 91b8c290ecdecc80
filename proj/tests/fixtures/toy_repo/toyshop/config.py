import os

DEFAULT_REGION = os.environ.get("TOYSHOP_REGION", "CA")
CURRENCY = "USD"
MAX_CART_ITEMS = 50
