package lib;

/** A chargeable payment instrument. */
public class Payment {

    private final String method;
    private final double amount;

    public Payment(String method, double amount) {
        this.method = method;
        this.amount = amount;
    }

    public boolean charge(String payer) {
        return amount > 0;
    }
}
