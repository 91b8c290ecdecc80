import re

EMAIL = re.compile(r"^[^@\s]+@[^@\s]+\.[a-z]{2,}$", re.IGNORECASE)


class Customer:
    def __init__(self, name, email, loyalty_points=0):
        if not EMAIL.match(email):
            raise ValueError("invalid email address: " + email)
        self.name = name
        self.email = email
        self.loyalty_points = loyalty_points

    def earn_points(self, amount_spent):
        self.loyalty_points += int(amount_spent // 10)
