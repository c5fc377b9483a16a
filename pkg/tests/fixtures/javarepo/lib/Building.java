package lib;

/** Base type for bookable properties. */
public abstract class Building {

    public abstract int capacity();
}
